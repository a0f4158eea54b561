#include "qbm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qbm/errors.hpp"

namespace qbm {

namespace {

// cap on the internal grid used to reach the stationary regime in late mode
constexpr int kMaxLateSteps = 200000;

} // namespace

Kernel2D toeplitz_from_slice(const TimeGrid& grid, const std::vector<double>& slice) {
    if (static_cast<int>(slice.size()) < grid.n_points())
        throw ConfigError("toeplitz_from_slice: slice shorter than the grid");
    Kernel2D out(grid, Symmetry2D::symmetric);
    const int n = grid.n_points();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.values(i, j) = slice[static_cast<std::size_t>(std::abs(i - j))];
    return out;
}

KernelSet build_kernel_set(const RunConfig& cfg) {
    cfg.validate();
    KernelSet ks;
    ks.grid = cfg.time_grid();
    ks.mode = cfg.kernel_mode;
    check_dense_budget(ks.grid, "build_kernel_set");

    const double t_f = cfg.thermal.T_F;
    ks.eta_minus = eta_bath_kernel(cfg.bath_minus, ks.grid);
    ks.nu_minus = nu_bath_kernel(cfg.bath_minus, ks.grid, t_f);
    ks.eta_plus = eta_bath_kernel(cfg.bath_plus, ks.grid);
    ks.nu_plus = nu_bath_kernel(cfg.bath_plus, ks.grid, t_f);
    ks.prop = green_time(cfg.idf, cfg.bath_minus, ks.grid);
    std::tie(ks.u, ks.v) = homogeneous_basis(cfg.idf, cfg.bath_minus, ks.grid);

    if (cfg.kernel_mode == KernelMode::finite) {
        ks.nu_gg = nu_gg_finite(ks.prop.g_kernel(), ks.nu_minus, ks.grid);
        ks.qh = initial_correlator(cfg.idf, cfg.thermal.T_I, ks.u, ks.v);
        ks.eta2 = eta2_time(ks.eta_plus, ks.nu_plus, ks.nu_gg, &ks.qh, ks.prop.g_odd());
        ks.nu2 = nu2_time(ks.eta_plus, ks.nu_plus, ks.nu_gg, &ks.qh, ks.prop.g_odd());
        return ks;
    }

    // late mode: evolve the internal response far past the transient and take
    // a stationary slice of nu_GG; the initial-state term has decayed there
    const double gamma = ks.prop.poles.decay_rate;
    if (!(gamma > 0.0))
        throw ConfigError(
            "build_kernel_set: late kernel mode needs minus-channel damping (lambda > 0)");
    // a stationary limit only exists when the static stiffness stays positive
    try {
        renormalized_frequency(cfg.idf, cfg.bath_minus, 0.0);
    } catch (const NumericsError& e) {
        throw ConfigError(std::string("build_kernel_set: late kernel mode needs a "
                                      "statically stable dressed oscillator; ") +
                          e.what());
    }
    const double dt = ks.grid.dt();
    const int i_ref = static_cast<int>(std::ceil(6.0 / (gamma * dt)));
    const int long_steps = i_ref + ks.grid.n_steps;
    if (long_steps > kMaxLateSteps)
        throw NumericsError("build_kernel_set: stationary reference time 6/gamma = " +
                            std::to_string(6.0 / gamma) + " needs " + std::to_string(long_steps) +
                            " steps at dt = " + std::to_string(dt) + " (budget " +
                            std::to_string(kMaxLateSteps) + "); increase dt or the coupling");
    ks.t_ref = i_ref * dt;

    const TimeGrid long_grid(long_steps * dt, long_steps);
    const DressedPropagator long_prop = green_time(cfg.idf, cfg.bath_minus, long_grid);
    const Kernel1D long_nu_minus = nu_bath_kernel(cfg.bath_minus, long_grid, t_f);
    const std::vector<double> slice =
        nu_gg_stationary(long_prop.g, dt, i_ref, ks.grid.n_steps, long_nu_minus.values);
    ks.nu_gg = toeplitz_from_slice(ks.grid, slice);
    ks.eta2 = eta2_time(ks.eta_plus, ks.nu_plus, ks.nu_gg, nullptr, ks.prop.g_odd());
    ks.nu2 = nu2_time(ks.eta_plus, ks.nu_plus, ks.nu_gg, nullptr, ks.prop.g_odd());
    return ks;
}

SpectralBundle build_fine_bundle(const RunConfig& cfg, BundleDiagnostics* diag, double omega_max,
                                 double d_omega) {
    cfg.validate();
    if (!(cfg.bath_minus.lambda != 0.0))
        throw ConfigError("build_fine_bundle: the dressed propagator needs lambda_minus > 0 "
                          "(real-axis poles otherwise)");

    // stationary spectra presume a statically stable dressed oscillator
    try {
        renormalized_frequency(cfg.idf, cfg.bath_minus, 0.0);
    } catch (const NumericsError& e) {
        throw ConfigError(std::string("build_fine_bundle: stationary spectra need a "
                                      "statically stable dressed oscillator; ") +
                          e.what());
    }
    const double omega_r = renormalized_frequency(cfg.idf, cfg.bath_minus);
    const double gamma =
        -eta_bath_freq(cfg.bath_minus, omega_r).imag() / (cfg.idf.mass * omega_r);

    if (omega_max <= 0.0) {
        const double span_cutoff = 12.0 * std::max(cfg.bath_minus.cutoff, cfg.bath_plus.cutoff);
        omega_max = std::max({cfg.omega_max, span_cutoff,
                              4.0 * std::max({cfg.idf.frequency, cfg.mdf.frequency,
                                              cfg.thermal.T_F})});
    }
    if (d_omega <= 0.0) {
        double feature = gamma;
        if (cfg.bath_minus.family == BathFamily::sub_ohmic_minus)
            feature = std::min(feature, cfg.bath_minus.omega_ir);
        d_omega = std::max(feature, 1e-6 * omega_max) / 6.0;
    }
    int n_freq = 2 * static_cast<int>(std::ceil(omega_max / d_omega / 2.0));
    constexpr int kMaxFine = 1 << 21;
    if (n_freq > kMaxFine) n_freq = kMaxFine;
    const FreqGrid grid(omega_max, n_freq);

    SpectralBundle bundle;
    bundle.t_f = cfg.thermal.T_F;
    bundle.g_bar = green_freq(cfg.idf, cfg.bath_minus, grid);
    bundle.eta_plus_bar = eta_bath_freq(cfg.bath_plus, grid);
    bundle.nu_plus_bar = nu_bath_freq(cfg.bath_plus, grid, cfg.thermal.T_F);
    const Spectrum nu_minus_bar = nu_bath_freq(cfg.bath_minus, grid, cfg.thermal.T_F);
    const NuGGFreq gg = nu_gg_freq(bundle.g_bar, nu_minus_bar, cfg.thermal.T_F);
    bundle.nu_gg_bar = gg.primary;

    if (diag) {
        diag->omega_r = omega_r;
        diag->pole_width = gamma;
        diag->nu_gg_dual_residual = gg.max_rel_residual;
        diag->grid = grid;
    }
    return bundle;
}

SpectraSet build_spectra_set(const RunConfig& cfg) {
    cfg.validate();
    SpectraSet ss;
    ss.grid = cfg.frequency_grid();
    ss.eta_minus_bar = eta_bath_freq(cfg.bath_minus, ss.grid);
    ss.nu_minus_bar = nu_bath_freq(cfg.bath_minus, ss.grid, cfg.thermal.T_F);
    ss.eta_plus_bar = eta_bath_freq(cfg.bath_plus, ss.grid);
    ss.nu_plus_bar = nu_bath_freq(cfg.bath_plus, ss.grid, cfg.thermal.T_F);
    ss.fdr_minus = check_bath_fdr(cfg.bath_minus, ss.grid, cfg.thermal.T_F);
    ss.fdr_plus = check_bath_fdr(cfg.bath_plus, ss.grid, cfg.thermal.T_F);

    if (cfg.bath_minus.lambda == 0.0) return ss;

    const SpectralBundle bundle = build_fine_bundle(cfg, &ss.bundle_diag);
    const LateFreqKernels late = kernels_late_freq(bundle);

    auto onto_output = [&](const Spectrum& fine) {
        Spectrum out(ss.grid);
        out.meta = fine.meta;
        out.meta.method += "+interp";
        for (int j = 0; j < ss.grid.n_points(); ++j)
            out.values[static_cast<std::size_t>(j)] = fine.interp(ss.grid.omega(j));
        return out;
    };
    ss.g_bar = onto_output(bundle.g_bar);
    ss.nu_gg_bar = onto_output(bundle.nu_gg_bar);
    ss.eta2_bar = onto_output(late.eta2_bar);
    ss.nu2_bar = onto_output(late.nu2_bar);
    ss.composite_available = true;
    return ss;
}

} // namespace qbm
