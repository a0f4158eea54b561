// qbm: kernels and Langevin dynamics for a particle whose center of mass
// couples to a scalar field through an internal oscillator. Natural units
// (hbar = c = k_B = 1) throughout.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbm/config.hpp"
#include "qbm/errors.hpp"
#include "qbm/hashing.hpp"
#include "qbm/io.hpp"
#include "qbm/langevin.hpp"
#include "qbm/pipeline.hpp"
#include "qbm/version.hpp"

namespace {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Overrides {
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> format;
    std::optional<int> n_traj;
};

qbm::RunConfig configure(const std::string& config_path, const Overrides& ov) {
    qbm::RunConfig cfg =
        config_path.empty() ? qbm::default_config() : qbm::load_config(config_path);
    if (ov.out_dir) cfg.out_dir = *ov.out_dir;
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.format) cfg.format = qbm::output_format_from_string(*ov.format);
    if (ov.n_traj) cfg.n_traj = *ov.n_traj;
    cfg.validate();
    return cfg;
}

ordered_json manifest_skeleton(const char* command, const qbm::RunConfig& cfg) {
    ordered_json m;
    m["tool"] = "qbm";
    m["version"] = qbm::kVersion;
    m["command"] = command;
    m["convention"] = qbm::kFourierConvention;
    m["config"] = ordered_json::parse(qbm::config_to_json(cfg));
    m["files"] = ordered_json::array();
    return m;
}

void add_file(ordered_json& manifest, const qbm::WrittenFile& f) {
    manifest["files"].push_back(
        {{"name", f.name}, {"bytes", f.bytes}, {"fnv1a64", f.hash}});
}

void finish_manifest(ordered_json& manifest, const qbm::RunConfig& cfg) {
    qbm::write_text_file(
        (std::filesystem::path(cfg.out_dir) / "manifest.json").string(),
        manifest.dump(2) + "\n");
}

std::vector<std::string> bath_comment(const char* tag, const qbm::BathSpec& b) {
    std::string line = std::string(tag) + ": family=" + qbm::to_string(b.family) +
                       " lambda=" + std::to_string(b.lambda) +
                       " cutoff=" + std::to_string(b.cutoff);
    if (b.family == qbm::BathFamily::sub_ohmic_minus)
        line += " omega_ir=" + std::to_string(b.omega_ir);
    return {line, "natural units: hbar = c = k_B = 1"};
}

std::vector<double> real_column(const qbm::Spectrum& s) {
    std::vector<double> out(s.values.size());
    for (std::size_t j = 0; j < s.values.size(); ++j) out[j] = s.values[j].real();
    return out;
}

std::vector<double> imag_column(const qbm::Spectrum& s) {
    std::vector<double> out(s.values.size());
    for (std::size_t j = 0; j < s.values.size(); ++j) out[j] = s.values[j].imag();
    return out;
}

int cmd_kernels(const qbm::RunConfig& cfg) {
    const auto t0 = Clock::now();
    qbm::ensure_directory(cfg.out_dir);
    ordered_json manifest = manifest_skeleton("kernels", cfg);

    const qbm::KernelSet ks = qbm::build_kernel_set(cfg);
    const double t_kernels = ms_since(t0);
    const qbm::SpectraSet ss = qbm::build_spectra_set(cfg);
    const double t_spectra = ms_since(t0) - t_kernels;

    const std::vector<double> lags = ks.grid.times();

    auto comments_with = [&](std::vector<std::string> base, const std::string& columns) {
        base.push_back(columns);
        return base;
    };

    add_file(manifest, qbm::write_table(
                           cfg.format, cfg.out_dir, "eta_minus",
                           comments_with(bath_comment("dissipation kernel, linear channel",
                                                      cfg.bath_minus),
                                         "columns: tau, eta"),
                           {{"tau", lags}, {"eta", ks.eta_minus.values}}));
    add_file(manifest,
             qbm::write_table(cfg.format, cfg.out_dir, "nu_minus",
                              comments_with(bath_comment("noise kernel, linear channel",
                                                         cfg.bath_minus),
                                            "columns: tau, nu (T_F = " +
                                                std::to_string(cfg.thermal.T_F) + ")"),
                              {{"tau", lags}, {"nu", ks.nu_minus.values}}));
    add_file(manifest, qbm::write_table(
                           cfg.format, cfg.out_dir, "eta_plus",
                           comments_with(bath_comment("dissipation kernel, trilinear channel",
                                                      cfg.bath_plus),
                                         "columns: tau, eta"),
                           {{"tau", lags}, {"eta", ks.eta_plus.values}}));
    add_file(manifest,
             qbm::write_table(cfg.format, cfg.out_dir, "nu_plus",
                              comments_with(bath_comment("noise kernel, trilinear channel",
                                                         cfg.bath_plus),
                                            "columns: tau, nu (T_F = " +
                                                std::to_string(cfg.thermal.T_F) + ")"),
                              {{"tau", lags}, {"nu", ks.nu_plus.values}}));
    add_file(manifest,
             qbm::write_table(
                 cfg.format, cfg.out_dir, "green_time",
                 {"dressed internal response G and homogeneous solutions u, v",
                  "omega_r = " + std::to_string(ks.prop.poles.omega_r) +
                      ", pole width = " + std::to_string(ks.prop.poles.decay_rate),
                  "columns: t, g, u, v"},
                 {{"t", lags}, {"g", ks.prop.g}, {"u", ks.u.values}, {"v", ks.v.values}}));

    const std::string mode_note =
        cfg.kernel_mode == qbm::KernelMode::finite
            ? "finite-time kernels (initial-state term included)"
            : "late-time stationary kernels (slice at t_ref = " + std::to_string(ks.t_ref) + ")";
    add_file(manifest, qbm::write_matrix(cfg.format, cfg.out_dir, "nu_gg",
                                         {"dressed internal correlator nu_GG(t_i, t_j)", mode_note},
                                         ks.nu_gg.values));
    add_file(manifest,
             qbm::write_matrix(cfg.format, cfg.out_dir, "eta2",
                               {"composite dissipation kernel eta2(t_i, t_j)", mode_note},
                               ks.eta2.values));
    add_file(manifest, qbm::write_matrix(cfg.format, cfg.out_dir, "nu2",
                                         {"composite noise kernel nu2(t_i, t_j)", mode_note},
                                         ks.nu2.values));

    const std::vector<double> omegas = ss.grid.omegas();
    add_file(manifest,
             qbm::write_table(
                 cfg.format, cfg.out_dir, "bath_spectra",
                 {"bath kernels in the frequency domain",
                  std::string(qbm::kFourierConvention),
                  "columns: omega, re_eta_minus, im_eta_minus, nu_minus, re_eta_plus, "
                  "im_eta_plus, nu_plus"},
                 {{"omega", omegas},
                  {"re_eta_minus", real_column(ss.eta_minus_bar)},
                  {"im_eta_minus", imag_column(ss.eta_minus_bar)},
                  {"nu_minus", real_column(ss.nu_minus_bar)},
                  {"re_eta_plus", real_column(ss.eta_plus_bar)},
                  {"im_eta_plus", imag_column(ss.eta_plus_bar)},
                  {"nu_plus", real_column(ss.nu_plus_bar)}}));

    qbm::NamedColumns composite_cols{{"omega", omegas}};
    std::vector<std::string> composite_comments{
        "dressed propagator and composite kernels in the frequency domain",
        std::string(qbm::kFourierConvention),
        "columns: omega, re_g, im_g, nu_gg, re_eta2, im_eta2, nu2"};
    if (ss.composite_available) {
        composite_cols.push_back({"re_g", real_column(ss.g_bar)});
        composite_cols.push_back({"im_g", imag_column(ss.g_bar)});
        composite_cols.push_back({"nu_gg", real_column(ss.nu_gg_bar)});
        composite_cols.push_back({"re_eta2", real_column(ss.eta2_bar)});
        composite_cols.push_back({"im_eta2", imag_column(ss.eta2_bar)});
        composite_cols.push_back({"nu2", real_column(ss.nu2_bar)});
    } else {
        composite_comments.push_back(
            "lambda_minus = 0: propagator has real-axis poles, columns set to zero");
        const std::vector<double> zeros(omegas.size(), 0.0);
        for (const char* name : {"re_g", "im_g", "nu_gg", "re_eta2", "im_eta2", "nu2"})
            composite_cols.push_back({name, zeros});
    }
    add_file(manifest, qbm::write_table(cfg.format, cfg.out_dir, "composite_spectra",
                                        composite_comments, composite_cols));

    manifest["kernel_hashes"] = {{"eta2", qbm::hash_hex(qbm::hash_kernel(ks.eta2))},
                                 {"nu2", qbm::hash_hex(qbm::hash_kernel(ks.nu2))},
                                 {"nu_gg", qbm::hash_hex(qbm::hash_kernel(ks.nu_gg))},
                                 {"g", qbm::hash_hex(qbm::hash_kernel(ks.prop.g_kernel()))}};
    manifest["poles"] = {{"omega_r", ks.prop.poles.omega_r},
                         {"decay_rate", ks.prop.poles.decay_rate}};
    manifest["fdr"] = {{"bath_minus_max_rel", ss.fdr_minus.max_rel},
                       {"bath_plus_max_rel", ss.fdr_plus.max_rel}};
    if (ss.composite_available)
        manifest["fdr"]["nu_gg_dual_max_rel"] = ss.bundle_diag.nu_gg_dual_residual;
    manifest["timings_ms"] = {{"kernels", t_kernels},
                              {"spectra", t_spectra},
                              {"total", ms_since(t0)}};
    finish_manifest(manifest, cfg);
    std::printf("kernels: wrote %zu data files to %s\n", manifest["files"].size(),
                cfg.out_dir.c_str());
    return 0;
}

int cmd_fdr(const qbm::RunConfig& cfg) {
    const auto t0 = Clock::now();
    qbm::ensure_directory(cfg.out_dir);
    ordered_json manifest = manifest_skeleton("fdr", cfg);
    ordered_json checks = ordered_json::array();

    std::string first_failure;
    auto record = [&](const std::string& name, double residual, double tol, ordered_json extra) {
        const bool pass = residual <= tol;
        std::printf("fdr %-34s max_rel=%.3e tol=%.1e %s\n", name.c_str(), residual, tol,
                    pass ? "PASS" : "FAIL");
        extra["identity"] = name;
        extra["max_rel"] = residual;
        extra["tol"] = tol;
        extra["pass"] = pass;
        checks.push_back(extra);
        if (!pass && first_failure.empty()) first_failure = name;
    };

    const qbm::FreqGrid fgrid = cfg.frequency_grid();
    const qbm::FdrReport minus = qbm::check_bath_fdr(cfg.bath_minus, fgrid, cfg.thermal.T_F);
    record("bath_minus", minus.max_rel, 1e-8, {{"n_points", minus.n_points}});
    const qbm::FdrReport plus = qbm::check_bath_fdr(cfg.bath_plus, fgrid, cfg.thermal.T_F);
    record("bath_plus", plus.max_rel, 1e-8, {{"n_points", plus.n_points}});

    if (cfg.bath_minus.lambda == 0.0)
        throw qbm::ConfigError(
            "fdr: dressed and composite identities need lambda_minus > 0");

    qbm::BundleDiagnostics diag;
    const qbm::SpectralBundle bundle = qbm::build_fine_bundle(cfg, &diag);
    record("nu_gg_dual_form", diag.nu_gg_dual_residual, 1e-8,
           {{"omega_r", diag.omega_r}, {"pole_width", diag.pole_width}});

    // two-frequency identity on a coarse sub-grid aligned with the bundle grid
    const double db = diag.grid.d_omega();
    const int stride = std::max(1, static_cast<int>(std::round(0.1 / db)));
    const double d2f = stride * db;
    const double w2f_target = std::min(0.45 * diag.grid.omega_max, 20.0);
    const int half = std::max(1, static_cast<int>(std::floor(w2f_target / d2f)));
    const qbm::FreqGrid pair_grid(half * d2f, 2 * half);
    auto [d2, n2] = qbm::two_freq_kernels(bundle, pair_grid, pair_grid);
    const qbm::GenFdrReport gen =
        qbm::check_generalized_fdr(d2, n2, cfg.thermal.T_F, &bundle);
    record("generalized_two_frequency", gen.max_rel, 1e-6,
           {{"n_admissible", gen.n_admissible}, {"rms_rel", gen.rms_rel}});
    record("reconstruction_im_eta2", gen.recon_im_eta2_l2, 1e-2, {});
    record("reconstruction_nu2", gen.recon_nu2_l2, 1e-2, {});

    manifest["checks"] = checks;
    manifest["timings_ms"] = {{"total", ms_since(t0)}};
    qbm::write_text_file(
        (std::filesystem::path(cfg.out_dir) / "fdr_report.json").string(),
        checks.dump(2) + "\n");
    finish_manifest(manifest, cfg);

    if (!first_failure.empty())
        throw qbm::IdentityError("fdr: identity '" + first_failure + "' violated");
    return 0;
}

int cmd_evolve(const qbm::RunConfig& cfg) {
    const auto t0 = Clock::now();
    qbm::ensure_directory(cfg.out_dir);
    ordered_json manifest = manifest_skeleton("evolve", cfg);

    const qbm::KernelSet ks = qbm::build_kernel_set(cfg);
    const qbm::Trajectory mean = qbm::solve_mean(cfg.mdf, ks.eta2, cfg.x0, cfg.v0);

    add_file(manifest,
             qbm::write_table(cfg.format, cfg.out_dir, "trajectory",
                              {"noise-free mean evolution of the center of mass",
                               "columns: t, x, v"},
                              {{"t", ks.grid.times()}, {"x", mean.x}, {"v", mean.v}}));
    manifest["kernel_hashes"] = {{"eta2", qbm::hash_hex(qbm::hash_kernel(ks.eta2))}};
    manifest["timings_ms"] = {{"total", ms_since(t0)}};
    finish_manifest(manifest, cfg);
    std::printf("evolve: wrote trajectory for t in [0, %g]\n", cfg.t_max);
    return 0;
}

int cmd_ensemble(const qbm::RunConfig& cfg) {
    const auto t0 = Clock::now();
    qbm::ensure_directory(cfg.out_dir);
    ordered_json manifest = manifest_skeleton("ensemble", cfg);

    const qbm::KernelSet ks = qbm::build_kernel_set(cfg);
    const double t_kernels = ms_since(t0);
    const qbm::EnsembleResult ens = qbm::ensemble_statistics(cfg.mdf, ks.eta2, ks.nu2, cfg.x0,
                                                             cfg.v0, cfg.seed, cfg.n_traj);

    add_file(manifest,
             qbm::write_table(cfg.format, cfg.out_dir, "ensemble_mean",
                              {"ensemble statistics over " + std::to_string(cfg.n_traj) +
                                   " trajectories, seed " + std::to_string(cfg.seed),
                               "columns: t, mean_x, se_mean_x, mean_v"},
                              {{"t", ks.grid.times()},
                               {"mean_x", ens.mean_x},
                               {"se_mean_x", ens.se_mean_x},
                               {"mean_v", ens.mean_v}}));
    add_file(manifest, qbm::write_matrix(cfg.format, cfg.out_dir, "cov_xx",
                                         {"unbiased two-time covariance of X(t_i), X(t_j)"},
                                         ens.cov_xx));

    if (cfg.per_trajectory) {
        const qbm::NoiseGenerator gen(ks.nu2);
        const int n_save = std::min(cfg.n_traj, 32);
        for (int k = 0; k < n_save; ++k) {
            const qbm::NoiseSample noise = gen.sample(cfg.seed, static_cast<std::uint64_t>(k));
            const qbm::Trajectory traj =
                qbm::solve_stochastic(cfg.mdf, ks.eta2, noise, cfg.x0, cfg.v0);
            char stem[32];
            std::snprintf(stem, sizeof(stem), "trajectory_%04d", k);
            add_file(manifest,
                     qbm::write_table(cfg.format, cfg.out_dir, stem,
                                      {"stochastic trajectory, substream index " +
                                           std::to_string(k),
                                       "columns: t, x, v"},
                                      {{"t", ks.grid.times()}, {"x", traj.x}, {"v", traj.v}}));
        }
    }

    manifest["kernel_hashes"] = {{"eta2", qbm::hash_hex(qbm::hash_kernel(ks.eta2))},
                                 {"nu2", qbm::hash_hex(qbm::hash_kernel(ks.nu2))}};
    manifest["timings_ms"] = {{"kernels", t_kernels}, {"total", ms_since(t0)}};
    finish_manifest(manifest, cfg);
    std::printf("ensemble: %d trajectories, wrote statistics to %s\n", cfg.n_traj,
                cfg.out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qbm: dissipative center-of-mass dynamics from a composite field environment"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;
    std::string out_dir, format;
    std::uint64_t seed = 0;
    int n_traj = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "JSON config file (defaults when omitted)");
        sub->add_option("-o,--out", out_dir, "output directory (overrides config)");
        sub->add_option("--seed", seed, "RNG seed (overrides config)");
        sub->add_option("--format", format, "output format: csv or binary");
        sub->add_option("--n-traj", n_traj, "trajectory count (overrides config)");
    };

    CLI::App* kernels = app.add_subcommand("kernels", "tabulate all kernels and spectra");
    CLI::App* fdr = app.add_subcommand("fdr", "check the fluctuation-dissipation identities");
    CLI::App* evolve = app.add_subcommand("evolve", "noise-free mean evolution");
    CLI::App* ensemble = app.add_subcommand("ensemble", "stochastic ensemble statistics");
    for (CLI::App* sub : {kernels, fdr, evolve, ensemble}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (!out_dir.empty()) ov.out_dir = out_dir;
        if (kernels->count("--seed") || fdr->count("--seed") || evolve->count("--seed") ||
            ensemble->count("--seed"))
            ov.seed = seed;
        if (!format.empty()) ov.format = format;
        if (n_traj > 0) ov.n_traj = n_traj;
        const qbm::RunConfig cfg = configure(config_path, ov);

        if (kernels->parsed()) return cmd_kernels(cfg);
        if (fdr->parsed()) return cmd_fdr(cfg);
        if (evolve->parsed()) return cmd_evolve(cfg);
        if (ensemble->parsed()) return cmd_ensemble(cfg);
        std::fprintf(stderr, "error: no command\n");
        return 1;
    } catch (const qbm::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const qbm::NumericsError& e) {
        std::fprintf(stderr, "numerics error: %s\n", e.what());
        return 2;
    } catch (const qbm::IdentityError& e) {
        std::fprintf(stderr, "identity violation: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
