#include "qbm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qbm/errors.hpp"

namespace qbm {

using ordered_json = nlohmann::ordered_json;

const char* to_string(KernelMode m) {
    return m == KernelMode::finite ? "finite" : "late";
}

KernelMode kernel_mode_from_string(const std::string& name) {
    if (name == "finite") return KernelMode::finite;
    if (name == "late") return KernelMode::late;
    throw ConfigError("config: unknown kernel_mode '" + name + "' (expected finite or late)");
}

const char* to_string(OutputFormat f) {
    return f == OutputFormat::csv ? "csv" : "binary";
}

OutputFormat output_format_from_string(const std::string& name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "binary") return OutputFormat::binary;
    throw ConfigError("config: unknown output format '" + name + "' (expected csv or binary)");
}

void RunConfig::validate() const {
    bath_minus.validate();
    bath_plus.validate();
    idf.validate();
    mdf.validate();
    thermal.validate();
    time_grid();
    frequency_grid();
    if (n_traj < 1) throw ConfigError("config: n_traj must be positive");
}

RunConfig default_config() {
    RunConfig cfg;
    cfg.bath_minus.family = BathFamily::sub_ohmic_minus;
    cfg.bath_plus.family = BathFamily::ohmic_plus;
    return cfg;
}

namespace {

void reject_unknown(const ordered_json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
}

double get_number(const ordered_json& obj, const char* key, double fallback,
                  const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number())
        throw ConfigError("config: " + where + "." + key + " must be a number");
    return v.get<double>();
}

std::int64_t get_integer(const ordered_json& obj, const char* key, std::int64_t fallback,
                         const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw ConfigError("config: " + where + "." + key + " must be an integer");
    return v.get<std::int64_t>();
}

std::string get_string(const ordered_json& obj, const char* key, const std::string& fallback,
                       const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string())
        throw ConfigError("config: " + where + "." + key + " must be a string");
    return v.get<std::string>();
}

bool get_bool(const ordered_json& obj, const char* key, bool fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_boolean())
        throw ConfigError("config: " + where + "." + key + " must be a boolean");
    return v.get<bool>();
}

void parse_bath(const ordered_json& obj, BathSpec& bath, double shared_lambda,
                bool have_shared_lambda, const std::string& where) {
    reject_unknown(obj, {"family", "lambda", "cutoff", "omega_ir", "modes", "sigma_delta"}, where);
    if (obj.contains("family"))
        bath.family = bath_family_from_string(get_string(obj, "family", "", where));
    if (have_shared_lambda) bath.lambda = shared_lambda;
    bath.lambda = get_number(obj, "lambda", bath.lambda, where);
    bath.cutoff = get_number(obj, "cutoff", bath.cutoff, where);
    bath.omega_ir = get_number(obj, "omega_ir", bath.omega_ir, where);
    bath.sigma_delta = get_number(obj, "sigma_delta", bath.sigma_delta, where);
    if (obj.contains("modes")) {
        const auto& modes = obj.at("modes");
        if (!modes.is_array()) throw ConfigError("config: " + where + ".modes must be an array");
        bath.modes.clear();
        for (const auto& m : modes) {
            DiscreteMode mode;
            if (m.is_array() && m.size() == 2 && m[0].is_number() && m[1].is_number()) {
                mode.omega = m[0].get<double>();
                mode.weight = m[1].get<double>();
            } else if (m.is_object()) {
                reject_unknown(m, {"omega", "weight"}, where + ".modes");
                mode.omega = get_number(m, "omega", 0.0, where + ".modes");
                mode.weight = get_number(m, "weight", 0.0, where + ".modes");
            } else {
                throw ConfigError("config: " + where +
                                  ".modes entries must be [omega, weight] or {omega, weight}");
            }
            bath.modes.push_back(mode);
        }
    }
}

void parse_oscillator(const ordered_json& obj, OscillatorSpec& osc, const std::string& where) {
    reject_unknown(obj, {"mass", "frequency"}, where);
    osc.mass = get_number(obj, "mass", osc.mass, where);
    osc.frequency = get_number(obj, "frequency", osc.frequency, where);
}

} // namespace

RunConfig parse_config(const std::string& json_text) {
    ordered_json root;
    try {
        root = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be a JSON object");

    reject_unknown(root,
                   {"lambda", "bath_minus", "bath_plus", "idf", "mdf", "thermal", "grid",
                    "freq_grid", "seed", "n_traj", "kernel_mode", "initial", "output"},
                   "top level");

    RunConfig cfg = default_config();

    const bool have_lambda = root.contains("lambda");
    double shared_lambda = 0.0;
    if (have_lambda) {
        if (!root.at("lambda").is_number())
            throw ConfigError("config: lambda must be a number");
        shared_lambda = root.at("lambda").get<double>();
    }
    if (have_lambda) {
        cfg.bath_minus.lambda = shared_lambda;
        cfg.bath_plus.lambda = shared_lambda;
    }

    if (root.contains("bath_minus"))
        parse_bath(root.at("bath_minus"), cfg.bath_minus, shared_lambda, have_lambda,
                   "bath_minus");
    if (root.contains("bath_plus"))
        parse_bath(root.at("bath_plus"), cfg.bath_plus, shared_lambda, have_lambda, "bath_plus");
    if (root.contains("idf")) parse_oscillator(root.at("idf"), cfg.idf, "idf");
    if (root.contains("mdf")) parse_oscillator(root.at("mdf"), cfg.mdf, "mdf");

    if (root.contains("thermal")) {
        const auto& th = root.at("thermal");
        reject_unknown(th, {"T_F", "T_I"}, "thermal");
        cfg.thermal.T_F = get_number(th, "T_F", cfg.thermal.T_F, "thermal");
        cfg.thermal.T_I = get_number(th, "T_I", cfg.thermal.T_I, "thermal");
    }
    if (root.contains("grid")) {
        const auto& g = root.at("grid");
        reject_unknown(g, {"t_max", "n_steps"}, "grid");
        cfg.t_max = get_number(g, "t_max", cfg.t_max, "grid");
        cfg.n_steps = static_cast<int>(get_integer(g, "n_steps", cfg.n_steps, "grid"));
    }
    if (root.contains("freq_grid")) {
        const auto& g = root.at("freq_grid");
        reject_unknown(g, {"omega_max", "n_freq"}, "freq_grid");
        cfg.omega_max = get_number(g, "omega_max", cfg.omega_max, "freq_grid");
        cfg.n_freq = static_cast<int>(get_integer(g, "n_freq", cfg.n_freq, "freq_grid"));
    }
    if (root.contains("seed")) {
        const auto& s = root.at("seed");
        if (!s.is_number_integer() && !s.is_number_unsigned())
            throw ConfigError("config: seed must be an integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    cfg.n_traj = static_cast<int>(get_integer(root, "n_traj", cfg.n_traj, "top level"));
    if (root.contains("kernel_mode"))
        cfg.kernel_mode =
            kernel_mode_from_string(get_string(root, "kernel_mode", "", "top level"));
    if (root.contains("initial")) {
        const auto& init = root.at("initial");
        reject_unknown(init, {"x0", "v0"}, "initial");
        cfg.x0 = get_number(init, "x0", cfg.x0, "initial");
        cfg.v0 = get_number(init, "v0", cfg.v0, "initial");
    }
    if (root.contains("output")) {
        const auto& out = root.at("output");
        reject_unknown(out, {"dir", "format", "per_trajectory"}, "output");
        cfg.out_dir = get_string(out, "dir", cfg.out_dir, "output");
        if (out.contains("format"))
            cfg.format = output_format_from_string(get_string(out, "format", "", "output"));
        cfg.per_trajectory = get_bool(out, "per_trajectory", cfg.per_trajectory, "output");
    }

    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const RunConfig& cfg) {
    auto bath_json = [](const BathSpec& b) {
        ordered_json j;
        j["family"] = to_string(b.family);
        j["lambda"] = b.lambda;
        j["cutoff"] = b.cutoff;
        if (b.family == BathFamily::sub_ohmic_minus) j["omega_ir"] = b.omega_ir;
        if (b.family == BathFamily::discrete) {
            j["sigma_delta"] = b.sigma_delta;
            ordered_json modes = ordered_json::array();
            for (const auto& m : b.modes) modes.push_back({{"omega", m.omega}, {"weight", m.weight}});
            j["modes"] = modes;
        }
        return j;
    };
    ordered_json j;
    j["bath_minus"] = bath_json(cfg.bath_minus);
    j["bath_plus"] = bath_json(cfg.bath_plus);
    j["idf"] = {{"mass", cfg.idf.mass}, {"frequency", cfg.idf.frequency}};
    j["mdf"] = {{"mass", cfg.mdf.mass}, {"frequency", cfg.mdf.frequency}};
    j["thermal"] = {{"T_F", cfg.thermal.T_F}, {"T_I", cfg.thermal.T_I}};
    j["grid"] = {{"t_max", cfg.t_max}, {"n_steps", cfg.n_steps}};
    j["freq_grid"] = {{"omega_max", cfg.omega_max}, {"n_freq", cfg.n_freq}};
    j["seed"] = cfg.seed;
    j["n_traj"] = cfg.n_traj;
    j["kernel_mode"] = to_string(cfg.kernel_mode);
    j["initial"] = {{"x0", cfg.x0}, {"v0", cfg.v0}};
    j["output"] = {{"dir", cfg.out_dir},
                   {"format", to_string(cfg.format)},
                   {"per_trajectory", cfg.per_trajectory}};
    return j.dump(2);
}

} // namespace qbm
