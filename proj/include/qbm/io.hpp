#pragma once
// Output writers. CSV carries '#' comment lines, a header row, and %.16e
// values; binary is raw row-major float64 with a JSON sidecar describing the
// shape and columns. Both are composed in memory first so every file gets a
// content hash for the run manifest, and reruns are byte-identical.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qbm/config.hpp"

namespace qbm {

struct WrittenFile {
    std::string name; // file name relative to the output directory
    std::uint64_t bytes{0};
    std::string hash; // fnv1a-64 of the file content, hex
};

using NamedColumns = std::vector<std::pair<std::string, std::vector<double>>>;

// column table -> <stem>.csv or <stem>.f64 (+ <stem>.f64.json sidecar)
WrittenFile write_table(OutputFormat format, const std::string& dir, const std::string& stem,
                        const std::vector<std::string>& comments, const NamedColumns& columns);

// dense matrix -> <stem>.csv or <stem>.f64 (+ sidecar)
WrittenFile write_matrix(OutputFormat format, const std::string& dir, const std::string& stem,
                         const std::vector<std::string>& comments, const Eigen::MatrixXd& m);

void write_text_file(const std::string& path, const std::string& content);

void ensure_directory(const std::string& dir);

} // namespace qbm
