// End-to-end tests of the qbm command-line tool: output layout, manifests,
// byte-identical reruns, the free-oscillator sanity trajectory, identity
// checks, and exit codes for bad configs and refused computations.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string qbm_bin() {
    const char* p = std::getenv("QBM_BIN");
    REQUIRE(p != nullptr);
    return p;
}

struct RunResult {
    int exit_code{-1};
    std::string output; // stdout + stderr
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = qbm_bin() + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    std::array<char, 4096> buf;
    size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), got);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("qbm_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// CSV reader: '#' comments, one header row, %.16e rows
std::map<std::string, std::vector<double>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::string line;
    std::vector<std::string> names;
    std::map<std::string, std::vector<double>> cols;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream row(line);
        std::string cell;
        if (names.empty()) {
            while (std::getline(row, cell, ',')) names.push_back(cell);
            continue;
        }
        size_t j = 0;
        while (std::getline(row, cell, ',')) {
            REQUIRE(j < names.size());
            cols[names[j++]].push_back(std::stod(cell));
        }
    }
    return cols;
}

} // namespace

TEST_CASE("help exits cleanly and lists the commands") {
    const RunResult r = run_cli("--help");
    CHECK(r.exit_code == 0);
    for (const char* cmd : {"kernels", "fdr", "evolve", "ensemble"})
        CHECK(r.output.find(cmd) != std::string::npos);
}

TEST_CASE("kernels run writes the full table set with a manifest") {
    const fs::path dir = fresh_dir("kernels");
    const fs::path cfg = write_config(
        dir, R"({"grid":{"t_max":20,"n_steps":256},"freq_grid":{"omega_max":30,"n_freq":1200}})");
    const RunResult r = run_cli("kernels -c " + cfg.string() + " -o " + (dir / "out").string());
    CHECK(r.exit_code == 0);

    const json manifest = json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(manifest.at("tool") == "qbm");
    CHECK(manifest.at("command") == "kernels");
    CHECK(manifest.at("config").at("grid").at("n_steps") == 256);
    CHECK(manifest.at("config").at("bath_minus").at("omega_ir").get<double>() ==
          doctest::Approx(0.05));
    REQUIRE(manifest.at("files").size() == 10);
    for (const auto& f : manifest.at("files")) {
        const fs::path p = dir / "out" / f.at("name").get<std::string>();
        REQUIRE(fs::exists(p));
        CHECK(fs::file_size(p) == f.at("bytes").get<std::uint64_t>());
    }
    CHECK(manifest.at("fdr").at("bath_minus_max_rel").get<double>() < 1e-10);
    CHECK(manifest.at("fdr").at("bath_plus_max_rel").get<double>() < 1e-10);
    CHECK(manifest.at("fdr").at("nu_gg_dual_max_rel").get<double>() < 1e-8);
    CHECK(manifest.contains("kernel_hashes"));

    // frequency tables carry the stated grid
    const auto spectra = read_csv(dir / "out" / "bath_spectra.csv");
    CHECK(spectra.at("omega").size() == 1201);
    CHECK(spectra.at("omega").front() == doctest::Approx(-30.0));
    CHECK(spectra.at("omega").back() == doctest::Approx(30.0));
}

TEST_CASE("reruns are byte-identical") {
    const fs::path dir = fresh_dir("rerun");
    const fs::path cfg = write_config(dir, R"({"grid":{"t_max":10,"n_steps":128}})");
    const RunResult r1 = run_cli("kernels -c " + cfg.string() + " -o " + (dir / "a").string());
    const RunResult r2 = run_cli("kernels -c " + cfg.string() + " -o " + (dir / "b").string());
    CHECK(r1.exit_code == 0);
    CHECK(r2.exit_code == 0);

    const json ma = json::parse(slurp(dir / "a" / "manifest.json"));
    const json mb = json::parse(slurp(dir / "b" / "manifest.json"));
    CHECK(ma.at("files") == mb.at("files")); // names, sizes, content hashes
    CHECK(slurp(dir / "a" / "eta2.csv") == slurp(dir / "b" / "eta2.csv"));
    CHECK(slurp(dir / "a" / "nu2.csv") == slurp(dir / "b" / "nu2.csv"));
}

TEST_CASE("evolve with decoupled baths reproduces the free cosine") {
    const fs::path dir = fresh_dir("evolve");
    const fs::path cfg = write_config(dir, R"({"lambda":0.0,"grid":{"t_max":20,"n_steps":2000}})");
    const RunResult r = run_cli("evolve -c " + cfg.string() + " -o " + (dir / "out").string());
    CHECK(r.exit_code == 0);

    const auto traj = read_csv(dir / "out" / "trajectory.csv");
    REQUIRE(traj.at("t").size() == 2001);
    double worst = 0.0;
    for (size_t i = 0; i < traj.at("t").size(); ++i)
        worst = std::max(worst,
                         std::abs(traj.at("x")[i] - std::cos(0.3 * traj.at("t")[i])));
    CHECK(worst < 1e-4);
}

TEST_CASE("fdr command passes all identities at defaults") {
    const fs::path dir = fresh_dir("fdr");
    const fs::path cfg = write_config(
        dir, R"({"grid":{"t_max":20,"n_steps":256},"freq_grid":{"omega_max":30,"n_freq":1200}})");
    const RunResult r = run_cli("fdr -c " + cfg.string() + " -o " + (dir / "out").string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("FAIL") == std::string::npos);

    const json report = json::parse(slurp(dir / "out" / "fdr_report.json"));
    REQUIRE(report.size() == 6);
    for (const auto& check : report) CHECK(check.at("pass") == true);
}

TEST_CASE("ensemble statistics rerun byte-identically") {
    const fs::path dir = fresh_dir("ensemble");
    const fs::path cfg = write_config(dir,
                                      R"({"grid":{"t_max":10,"n_steps":100},"seed":777,"n_traj":8,
                                          "output":{"per_trajectory":true}})");
    const RunResult r1 = run_cli("ensemble -c " + cfg.string() + " -o " + (dir / "a").string());
    const RunResult r2 = run_cli("ensemble -c " + cfg.string() + " -o " + (dir / "b").string());
    CHECK(r1.exit_code == 0);
    CHECK(r2.exit_code == 0);

    const json ma = json::parse(slurp(dir / "a" / "manifest.json"));
    const json mb = json::parse(slurp(dir / "b" / "manifest.json"));
    CHECK(ma.at("files") == mb.at("files"));
    REQUIRE(ma.at("files").size() == 10); // mean, covariance, 8 saved trajectories
    CHECK(slurp(dir / "a" / "ensemble_mean.csv") == slurp(dir / "b" / "ensemble_mean.csv"));
    CHECK(slurp(dir / "a" / "cov_xx.csv") == slurp(dir / "b" / "cov_xx.csv"));
    CHECK(fs::exists(dir / "a" / "trajectory_0007.csv"));

    // a different seed must change the statistics
    const RunResult r3 = run_cli("ensemble -c " + cfg.string() + " --seed 778 -o " +
                                 (dir / "c").string());
    CHECK(r3.exit_code == 0);
    CHECK(slurp(dir / "a" / "ensemble_mean.csv") != slurp(dir / "c" / "ensemble_mean.csv"));
}

TEST_CASE("binary format writes raw tables with sidecars") {
    const fs::path dir = fresh_dir("binary");
    const fs::path cfg = write_config(dir, R"({"grid":{"t_max":5,"n_steps":64}})");
    const RunResult r = run_cli("evolve -c " + cfg.string() + " --format binary -o " +
                                (dir / "out").string());
    CHECK(r.exit_code == 0);
    REQUIRE(fs::exists(dir / "out" / "trajectory.f64"));
    REQUIRE(fs::exists(dir / "out" / "trajectory.f64.json"));
    // 65 rows x 3 columns of doubles
    CHECK(fs::file_size(dir / "out" / "trajectory.f64") == 65 * 3 * sizeof(double));
    const json sidecar = json::parse(slurp(dir / "out" / "trajectory.f64.json"));
    CHECK(sidecar.at("shape") == json::array({65, 3}));
    CHECK(sidecar.at("dtype") == "float64");
}

TEST_CASE("config and numerics failures map to distinct exit codes") {
    const fs::path dir = fresh_dir("exitcodes");

    const fs::path bad_key = write_config(dir, R"({"bogus":1})");
    const RunResult r1 = run_cli("kernels -c " + bad_key.string() + " -o " +
                                 (dir / "o1").string());
    CHECK(r1.exit_code == 1);
    CHECK(r1.output.find("unknown key") != std::string::npos);

    std::ofstream(dir / "big.json") << R"({"grid":{"t_max":10,"n_steps":4097}})";
    const RunResult r2 = run_cli("kernels -c " + (dir / "big.json").string() + " -o " +
                                 (dir / "o2").string());
    CHECK(r2.exit_code == 2);
    CHECK(r2.output.find("numerics error") != std::string::npos);

    std::ofstream(dir / "nolinear.json") << R"({"bath_minus":{"lambda":0.0}})";
    const RunResult r3 = run_cli("fdr -c " + (dir / "nolinear.json").string() + " -o " +
                                 (dir / "o3").string());
    CHECK(r3.exit_code == 1);

    // an overcritical static coupling is refused before any late-time kernel work
    std::ofstream(dir / "unstable.json")
        << R"({"kernel_mode":"late","bath_minus":{"omega_ir":0.005},
               "grid":{"t_max":10,"n_steps":128}})";
    const RunResult r4 = run_cli("kernels -c " + (dir / "unstable.json").string() + " -o " +
                                 (dir / "o4").string());
    CHECK(r4.exit_code == 1);
    CHECK(r4.output.find("stab") != std::string::npos);

    const RunResult r5 = run_cli("frobnicate");
    CHECK(r5.exit_code != 0);
}
