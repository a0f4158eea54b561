#pragma once
// Run configuration: JSON schema shared by the CLI commands. Unknown keys are
// rejected so typos fail loudly instead of silently running defaults.

#include <cstdint>
#include <string>

#include "qbm/bath.hpp"
#include "qbm/grids.hpp"
#include "qbm/idf.hpp"

namespace qbm {

enum class KernelMode { finite, late };
const char* to_string(KernelMode m);
KernelMode kernel_mode_from_string(const std::string& name);

enum class OutputFormat { csv, binary };
const char* to_string(OutputFormat f);
OutputFormat output_format_from_string(const std::string& name);

struct RunConfig {
    BathSpec bath_minus;
    BathSpec bath_plus;
    OscillatorSpec idf{1.0, 1.0};
    OscillatorSpec mdf{1.0, 0.3};
    ThermalSpec thermal;

    double t_max{40.0};
    int n_steps{1024};
    double omega_max{40.0};
    int n_freq{4000};

    std::uint64_t seed{12345};
    int n_traj{100};
    KernelMode kernel_mode{KernelMode::finite};
    double x0{1.0};
    double v0{0.0};

    std::string out_dir{"out"};
    OutputFormat format{OutputFormat::csv};
    bool per_trajectory{false};

    TimeGrid time_grid() const { return TimeGrid(t_max, n_steps); }
    FreqGrid frequency_grid() const { return FreqGrid(omega_max, n_freq); }
    void validate() const;
};

// built-in defaults (also what an empty JSON object parses to)
RunConfig default_config();

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// normalized echo of every field, stable key order
std::string config_to_json(const RunConfig& cfg);

} // namespace qbm
