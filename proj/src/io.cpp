#include "qbm/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "qbm/errors.hpp"
#include "qbm/hashing.hpp"

namespace qbm {

namespace {

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

WrittenFile commit_file(const std::string& dir, const std::string& name,
                        const std::string& content) {
    const std::filesystem::path path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("io: cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw ConfigError("io: short write to '" + path.string() + "'");
    return WrittenFile{name, content.size(), hash_hex(fnv1a64(content))};
}

std::string csv_table(const std::vector<std::string>& comments, const NamedColumns& columns) {
    std::string s;
    for (const auto& c : comments) s += "# " + c + "\n";
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (j) s += ",";
        s += columns[j].first;
    }
    s += "\n";
    const std::size_t n_rows = columns.empty() ? 0 : columns.front().second.size();
    for (std::size_t i = 0; i < n_rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) {
            if (j) s += ",";
            s += format_value(columns[j].second[i]);
        }
        s += "\n";
    }
    return s;
}

std::string csv_matrix(const std::vector<std::string>& comments, const Eigen::MatrixXd& m) {
    std::string s;
    for (const auto& c : comments) s += "# " + c + "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) s += ",";
            s += format_value(m(i, j));
        }
        s += "\n";
    }
    return s;
}

std::string raw_doubles(const double* data, std::size_t n) {
    // files record IEEE-754 doubles in the host byte order; every supported
    // target here is little-endian
    return std::string(reinterpret_cast<const char*>(data), n * sizeof(double));
}

std::string sidecar_json(const std::vector<std::string>& comments,
                         const std::vector<std::string>& column_names, std::size_t rows,
                         std::size_t cols) {
    nlohmann::ordered_json j;
    j["dtype"] = "float64";
    j["byte_order"] = "little";
    j["order"] = "row-major";
    j["shape"] = {rows, cols};
    if (!column_names.empty()) j["columns"] = column_names;
    j["comments"] = comments;
    return j.dump(2) + "\n";
}

} // namespace

WrittenFile write_table(OutputFormat format, const std::string& dir, const std::string& stem,
                        const std::vector<std::string>& comments, const NamedColumns& columns) {
    if (columns.empty()) throw ConfigError("io: table '" + stem + "' has no columns");
    const std::size_t n_rows = columns.front().second.size();
    for (const auto& [name, data] : columns)
        if (data.size() != n_rows)
            throw ConfigError("io: column '" + name + "' of table '" + stem +
                              "' has mismatched length");
    if (format == OutputFormat::csv)
        return commit_file(dir, stem + ".csv", csv_table(comments, columns));

    std::string raw;
    raw.reserve(n_rows * columns.size() * sizeof(double));
    for (std::size_t i = 0; i < n_rows; ++i)
        for (const auto& [name, data] : columns) raw += raw_doubles(&data[i], 1);
    std::vector<std::string> names;
    for (const auto& [name, data] : columns) names.push_back(name);
    commit_file(dir, stem + ".f64.json", sidecar_json(comments, names, n_rows, columns.size()));
    return commit_file(dir, stem + ".f64", raw);
}

WrittenFile write_matrix(OutputFormat format, const std::string& dir, const std::string& stem,
                         const std::vector<std::string>& comments, const Eigen::MatrixXd& m) {
    if (format == OutputFormat::csv)
        return commit_file(dir, stem + ".csv", csv_matrix(comments, m));
    std::string raw;
    raw.reserve(static_cast<std::size_t>(m.size()) * sizeof(double));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) raw += raw_doubles(&m(i, j), 1);
    commit_file(dir, stem + ".f64.json",
                sidecar_json(comments, {}, static_cast<std::size_t>(m.rows()),
                             static_cast<std::size_t>(m.cols())));
    return commit_file(dir, stem + ".f64", raw);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("io: cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw ConfigError("io: short write to '" + path + "'");
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("io: cannot create directory '" + dir + "': " + ec.message());
}

} // namespace qbm
