// Dressed internal-oscillator tests: the Volterra response against the free
// oscillator and the integro-differential equation residual, the frequency
// propagator against its defining formula and FDR, the renormalized frequency
// including the overcritical refusal, and the dressed noise correlator nu_GG
// through three independent routes (dense double convolution, stationary
// slice, frequency integral).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "oracles.hpp"
#include "qbm/bath.hpp"
#include "qbm/config.hpp"
#include "qbm/errors.hpp"
#include "qbm/idf.hpp"
#include "qbm/pipeline.hpp"

using namespace qbm;

namespace {

BathSpec minus_bath(double lambda, double cutoff, double omega_ir) {
    BathSpec b;
    b.family = BathFamily::sub_ohmic_minus;
    b.lambda = lambda;
    b.cutoff = cutoff;
    b.omega_ir = omega_ir;
    return b;
}

} // namespace

TEST_CASE("free-oscillator response and homogeneous basis") {
    OscillatorSpec osc;
    osc.mass = 1.0;
    osc.frequency = 1.0;
    const BathSpec off = minus_bath(0.0, 10.0, 0.05);
    const TimeGrid grid(20.0, 20000); // dt = 1e-3

    const DressedPropagator d = green_time(osc, off, grid);
    CHECK(d.g[0] == 0.0);
    CHECK((d.g[1] - d.g[0]) / grid.dt() == doctest::Approx(1.0 / osc.mass).epsilon(1e-3));
    double max_err = 0.0;
    for (int i = 0; i < grid.n_points(); i += 13)
        max_err = std::max(max_err, std::abs(d.g[static_cast<size_t>(i)] -
                                             oracles::g_free(1.0, 1.0, grid.time(i))));
    CHECK(max_err < 1e-6);

    const auto [u, v] = homogeneous_basis(osc, off, grid);
    double err_u = 0.0;
    double err_v = 0.0;
    for (int i = 0; i < grid.n_points(); i += 13) {
        err_u = std::max(err_u, std::abs(u.values[static_cast<size_t>(i)] -
                                         oracles::u_free(1.0, grid.time(i))));
        err_v = std::max(err_v, std::abs(v.values[static_cast<size_t>(i)] -
                                         oracles::v_free(1.0, grid.time(i))));
    }
    CHECK(err_u < 1e-6);
    CHECK(err_v < 1e-6);
}

TEST_CASE("dressed response satisfies its integro-differential equation") {
    // direct residual check: m (x'' + w0^2 x) + 2 int_0^t eta(t-s) x(s) ds = 0
    // evaluated with central differences and a trapezoid memory sum
    OscillatorSpec osc;
    osc.mass = 1.3;
    osc.frequency = 0.9;
    const BathSpec b = minus_bath(0.3, 3.0, 0.4);
    const TimeGrid grid(20.0, 2000);
    const double dt = grid.dt();
    const Kernel1D eta = eta_bath_kernel(b, grid);

    const DressedPropagator d = green_time(osc, b, grid);
    const auto [u, v] = homogeneous_basis(osc, b, grid);

    auto residual = [&](const std::vector<double>& x) {
        double worst = 0.0;
        for (int i = 1; i + 1 < grid.n_points(); ++i) {
            const double xdd = (x[static_cast<size_t>(i + 1)] - 2.0 * x[static_cast<size_t>(i)] +
                                x[static_cast<size_t>(i - 1)]) /
                               (dt * dt);
            double mem = 0.0;
            for (int k = 0; k <= i; ++k) {
                const double w = (k == 0 || k == i) ? 0.5 : 1.0;
                mem += w * eta.values[static_cast<size_t>(i - k)] * x[static_cast<size_t>(k)];
            }
            mem *= dt;
            worst = std::max(worst, std::abs(osc.mass * (xdd + osc.frequency * osc.frequency *
                                                                   x[static_cast<size_t>(i)]) +
                                             2.0 * mem));
        }
        return worst;
    };

    CHECK(residual(d.g) < 5e-4);
    CHECK(residual(u.values) < 5e-4);
    CHECK(residual(v.values) < 5e-4);
    // v and m G solve the same initial-value problem
    double dv = 0.0;
    for (int i = 0; i < grid.n_points(); ++i)
        dv = std::max(dv, std::abs(v.values[static_cast<size_t>(i)] -
                                   osc.mass * d.g[static_cast<size_t>(i)]));
    CHECK(dv < 1e-12);
}

TEST_CASE("frequency propagator formula and limits") {
    OscillatorSpec osc;
    const BathSpec off = minus_bath(0.0, 10.0, 0.05);
    CHECK(green_freq(osc, off, 0.0) == std::complex<double>(1.0, 0.0));
    CHECK(green_freq(osc, off, 2.0).real() == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
    CHECK(green_freq(osc, off, 2.0).imag() == 0.0);

    const BathSpec b = minus_bath(0.1, 10.0, 0.01);
    const std::complex<double> g1 = green_freq(osc, b, 1.0);
    CHECK(std::isfinite(std::abs(g1)));
    CHECK(g1.imag() > 0.0);

    // conjugation symmetry and the defining denominator
    const BathSpec bs = minus_bath(0.2, 10.0, 0.1);
    for (double w : {0.4, 1.7}) {
        const std::complex<double> gp = green_freq(osc, bs, w);
        const std::complex<double> gm = green_freq(osc, bs, -w);
        CHECK(std::abs(gm - std::conj(gp)) < 1e-14);
        const std::complex<double> den =
            osc.mass * (osc.frequency * osc.frequency - w * w) + 2.0 * eta_bath_freq(bs, w);
        CHECK(std::abs(gp - 1.0 / den) < 1e-14);
    }

    // propagator-level fluctuation-dissipation input: Im G = -2 |G|^2 Im eta
    for (double w : {0.3, 1.1, 4.0}) {
        const std::complex<double> g = green_freq(osc, bs, w);
        const double want = -2.0 * std::norm(g) * eta_bath_freq(bs, w).imag();
        CHECK(oracles::rel_err(g.imag(), want) < 1e-12);
    }
}

TEST_CASE("renormalized frequency and the overcritical refusal") {
    OscillatorSpec osc;
    CHECK(renormalized_frequency(osc, minus_bath(0.0, 10.0, 0.05)) == 1.0);

    // weak coupling: within 1% of the bare frequency at w = w0
    CHECK(std::abs(renormalized_frequency(osc, minus_bath(0.1, 10.0, 0.05)) - 1.0) < 0.01);

    // static overcriticality: m w0^2 < 2 int J/s ~ l^2 pi/(2 w_ir)
    CHECK_THROWS_AS(renormalized_frequency(osc, minus_bath(0.1, 10.0, 0.005), 0.0),
                    NumericsError);
    // the same parameters are fine at the bare frequency where the shift is small
    CHECK_NOTHROW(renormalized_frequency(osc, minus_bath(0.1, 10.0, 0.005), 1.0));
}

TEST_CASE("damped response envelope decays") {
    OscillatorSpec osc;
    const BathSpec b = minus_bath(0.1, 10.0, 0.05);
    const TimeGrid grid(40.0, 4000);
    const FreqGrid fg(20.0, 2000);
    const DressedPropagator d = green_time(osc, b, grid, &fg);
    CHECK(d.poles.decay_rate > 0.0);
    double early = 0.0;
    double late = 0.0;
    for (int i = 0; i < grid.n_points(); ++i) {
        const double t = grid.time(i);
        const double a = std::abs(d.g[static_cast<size_t>(i)]);
        if (t <= 10.0) early = std::max(early, a);
        if (t >= 30.0) late = std::max(late, a);
    }
    CHECK(late < early);
    // frequency-domain attachment: Im G sign condition on the grid
    REQUIRE(!d.g_bar.values.empty());
    for (int j = 0; j < d.g_bar.grid.n_points(); j += 101) {
        const double w = d.g_bar.grid.omega(j);
        CHECK(d.g_bar.at(j).imag() * (w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0)) >= -1e-12);
    }
}

TEST_CASE("thermal initial moments and correlator") {
    OscillatorSpec osc;
    osc.mass = 2.0;
    osc.frequency = 3.0;
    const WignerMoments m0 = initial_moments(osc, 0.0);
    CHECK(m0.sigma_qq == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
    CHECK(m0.sigma_pp == doctest::Approx(3.0).epsilon(1e-14));
    const WignerMoments m5 = initial_moments(osc, 5.0);
    CHECK(m5.sigma_qq == doctest::Approx(std::cosh(0.3) / std::sinh(0.3) / 12.0).epsilon(1e-13));
    CHECK(m5.sigma_pp == doctest::Approx(3.0 * std::cosh(0.3) / std::sinh(0.3)).epsilon(1e-13));

    // free evolution, vacuum initial state: <<Q(t1)Q(t2)>> = cos(w0 (t1-t2))/(2 m w0)
    OscillatorSpec unit;
    const BathSpec off = minus_bath(0.0, 10.0, 0.05);
    const TimeGrid grid(4.0, 400);
    const auto [u, v] = homogeneous_basis(unit, off, grid);
    const Kernel2D qq = initial_correlator(unit, 0.0, u, v);
    double max_err = 0.0;
    for (int i = 0; i < grid.n_points(); i += 37) {
        for (int j = 0; j < grid.n_points(); j += 37) {
            const double want = std::cos(grid.time(i) - grid.time(j)) / 2.0;
            max_err = std::max(max_err, std::abs(qq.values(i, j) - want));
        }
    }
    CHECK(max_err < 1e-4);
    CHECK(qq.asymmetry() < 1e-13);
}

TEST_CASE("nu_GG dense route matches its defining double integral") {
    OscillatorSpec osc;
    const BathSpec b = minus_bath(0.5, 4.0, 0.2);
    const TimeGrid grid(3.0, 24);
    const DressedPropagator d = green_time(osc, b, grid);
    const Kernel1D nu_minus = nu_bath_kernel(b, grid, 1.0);
    const Kernel2D gg = nu_gg_finite(d.g_kernel(), nu_minus, grid);

    // independent direct evaluation of the trapezoid double sum
    const int n = grid.n_points();
    const double dt = grid.dt();
    double max_err = 0.0;
    for (int i = 0; i < n; i += 5) {
        for (int j = 0; j < n; j += 5) {
            double acc = 0.0;
            for (int a = 0; a <= i; ++a) {
                const double wa = (a == 0 || a == i) ? 0.5 : 1.0;
                for (int bb = 0; bb <= j; ++bb) {
                    const double wb = (bb == 0 || bb == j) ? 0.5 : 1.0;
                    acc += wa * wb * d.g[static_cast<size_t>(i - a)] *
                           nu_minus.at_lag(a - bb) * d.g[static_cast<size_t>(j - bb)];
                }
            }
            acc *= dt * dt;
            max_err = std::max(max_err, std::abs(gg.values(i, j) - acc));
        }
    }
    CHECK(max_err < 1e-12);
    CHECK(gg.asymmetry() < 1e-12);
}

TEST_CASE("stationary slice equals the dense late-time column") {
    const double dt = 0.05;
    const int i_ref = 200;
    const int n_window = 60;
    OscillatorSpec osc;
    const BathSpec b = minus_bath(1.0, 10.0, 0.05);
    const TimeGrid long_grid((i_ref + n_window) * dt, i_ref + n_window);
    const DressedPropagator d = green_time(osc, b, long_grid);
    const Kernel1D nu_minus = nu_bath_kernel(b, long_grid, 1.0);

    const std::vector<double> slice =
        nu_gg_stationary(d.g, dt, i_ref, n_window, nu_minus.values);
    const Kernel2D dense = nu_gg_finite(d.g_kernel(), nu_minus, long_grid);

    double max_rel = 0.0;
    for (int j = 0; j <= n_window; ++j) {
        const double want = dense.values(i_ref + j, i_ref);
        max_rel = std::max(max_rel, oracles::rel_err(slice[static_cast<size_t>(j)], want));
    }
    CHECK(max_rel < 1e-12);
}

TEST_CASE("stationary nu_GG matches its frequency integral") {
    // (time domain) long Volterra evolution + double convolution slice vs
    // (frequency domain) (1/2pi) int |G|^2 nu_minus dw -- fully independent
    RunConfig cfg = default_config();
    cfg.t_max = 20.0;
    cfg.n_steps = 256;
    cfg.kernel_mode = KernelMode::late;
    const KernelSet ks = build_kernel_set(cfg);

    const SpectralBundle bundle = build_fine_bundle(cfg);
    const FreqGrid& g = bundle.nu_gg_bar.grid;
    double sum = 0.0;
    for (int j = 0; j < g.n_points(); ++j) {
        const double w = (j == 0 || j == g.n_points() - 1) ? 0.5 : 1.0;
        sum += w * bundle.nu_gg_bar.values[static_cast<size_t>(j)].real();
    }
    const double integral = sum * g.d_omega() / (2.0 * oracles::kPi);
    CHECK(oracles::rel_err(ks.nu_gg.values(0, 0), integral) < 1e-4);
}

TEST_CASE("frequency-domain nu_GG dual forms") {
    RunConfig cfg = default_config();
    const SpectralBundle bundle = build_fine_bundle(cfg);
    const Spectrum nu_minus_bar = nu_bath_freq(cfg.bath_minus, bundle.g_bar.grid, cfg.thermal.T_F);
    const NuGGFreq gg = nu_gg_freq(bundle.g_bar, nu_minus_bar, cfg.thermal.T_F);
    CHECK(gg.max_rel_residual < 1e-10);
    // spot-check the primary form |G|^2 nu_minus
    const FreqGrid& g = gg.primary.grid;
    for (int j = g.zero_index() + 1; j < g.n_points(); j += 9973) {
        const double want = std::norm(bundle.g_bar.at(j)) * nu_minus_bar.at(j).real();
        CHECK(oracles::rel_err(gg.primary.at(j).real(), want) < 1e-12);
    }
}

TEST_CASE("late kernel mode refuses an unstable dressed oscillator") {
    RunConfig cfg = default_config();
    cfg.t_max = 10.0;
    cfg.n_steps = 128;
    cfg.kernel_mode = KernelMode::late;
    cfg.bath_minus.omega_ir = 0.005; // static shift exceeds the bare stiffness
    CHECK_THROWS_AS(build_kernel_set(cfg), ConfigError);
    CHECK_THROWS_AS(build_fine_bundle(cfg), ConfigError);
}
