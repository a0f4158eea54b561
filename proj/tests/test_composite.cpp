// Composite center-of-mass kernel tests: the time-domain assembly against a
// hand-computed mock, structural invariants (causal mask, symmetry), the
// frequency-domain assembly against the two-frequency marginals, the
// generalized fluctuation-dissipation identity, the compact one-integral
// dissipation spectrum, the truncation refusal, and the influence phase.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "qbm/composite.hpp"
#include "qbm/config.hpp"
#include "qbm/errors.hpp"
#include "qbm/pipeline.hpp"

using namespace qbm;

namespace {

struct Mock {
    TimeGrid grid{2.0, 2};
    Kernel1D eta_plus, nu_plus, g;
    Kernel2D nu_gg, qh;

    Mock() {
        eta_plus = Kernel1D(grid, Support::odd);
        nu_plus = Kernel1D(grid, Support::even);
        g = Kernel1D(grid, Support::odd);
        eta_plus.values = {0.3, -0.7, 0.2};
        nu_plus.values = {1.1, 0.4, -0.25};
        g.values = {0.05, 0.6, -0.35};
        nu_gg = Kernel2D(grid, Symmetry2D::symmetric);
        nu_gg.values << 1.0, 0.2, -0.1, 0.2, 0.8, 0.3, -0.1, 0.3, 0.5;
        qh = Kernel2D(grid, Symmetry2D::symmetric);
        qh.values << 0.4, -0.15, 0.05, -0.15, 0.6, 0.1, 0.05, 0.1, 0.9;
    }
};

double l2_rel(const std::vector<std::complex<double>>& got,
              const std::vector<std::complex<double>>& want) {
    double num = 0.0;
    double den = 0.0;
    for (size_t k = 0; k < got.size(); ++k) {
        num += std::norm(got[k] - want[k]);
        den += std::norm(want[k]);
    }
    return std::sqrt(num / den);
}

} // namespace

TEST_CASE("time-domain assembly matches the hand-computed mock") {
    const Mock m;
    const Kernel2D eta2 = eta2_time(m.eta_plus, m.nu_plus, m.nu_gg, &m.qh, m.g);
    const Kernel2D nu2 = nu2_time(m.eta_plus, m.nu_plus, m.nu_gg, &m.qh, m.g);

    CHECK(eta2.symmetry == Symmetry2D::causal_lower);
    CHECK(nu2.symmetry == Symmetry2D::symmetric);

    const double e[3] = {0.3, -0.7, 0.2};
    const double nn[3] = {1.1, 0.4, -0.25};
    const double gg[3] = {0.05, 0.6, -0.35};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double sw = m.nu_gg.values(i, j) + m.qh.values(i, j);
            const int a = std::abs(i - j);
            double want_eta;
            if (i > j)
                want_eta = 0.5 * e[a] * sw + 0.25 * nn[a] * gg[a];
            else if (i == j)
                want_eta = 0.5 * (0.5 * e[0] * sw + 0.25 * nn[0] * gg[0]); // equal-time step = 1/2
            else
                want_eta = 0.0;
            CHECK(eta2.values(i, j) == doctest::Approx(want_eta).epsilon(1e-14));
            // eta_plus and g are odd in the lag, so their product is even
            const double want_nu = 0.5 * nn[a] * sw - 0.25 * e[a] * gg[a];
            CHECK(nu2.values(i, j) == doctest::Approx(want_nu).epsilon(1e-14));
        }
    }

    // dropping the initial-state correlator removes exactly the qh weight
    const Kernel2D eta2_late = eta2_time(m.eta_plus, m.nu_plus, m.nu_gg, nullptr, m.g);
    CHECK(eta2_late.values(2, 1) ==
          doctest::Approx(0.5 * e[1] * m.nu_gg.values(2, 1) + 0.25 * nn[1] * gg[1])
              .epsilon(1e-14));
}

TEST_CASE("assembly refuses mismatched grids and asymmetric state input") {
    const Mock m;
    Kernel1D wrong(TimeGrid(2.0, 4), Support::odd);
    CHECK_THROWS_AS(eta2_time(wrong, m.nu_plus, m.nu_gg, &m.qh, m.g), ConfigError);
    CHECK_THROWS_AS(nu2_time(m.eta_plus, wrong, m.nu_gg, &m.qh, m.g), ConfigError);

    Kernel2D bad_qh(TimeGrid(2.0, 4), Symmetry2D::symmetric);
    CHECK_THROWS_AS(eta2_time(m.eta_plus, m.nu_plus, m.nu_gg, &bad_qh, m.g), ConfigError);

    Kernel2D lopsided = m.nu_gg;
    lopsided.values(0, 1) = 0.9; // breaks the t1 <-> t2 symmetry
    CHECK_THROWS_AS(nu2_time(m.eta_plus, m.nu_plus, lopsided, &m.qh, m.g), NumericsError);
}

TEST_CASE("pipeline kernels keep the causal mask and symmetry") {
    RunConfig cfg = default_config();
    cfg.t_max = 10.0;
    cfg.n_steps = 200;
    const KernelSet ks = build_kernel_set(cfg);
    const int n = ks.grid.n_points();
    double upper = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) upper = std::max(upper, std::abs(ks.eta2.values(i, j)));
    CHECK(upper == 0.0);
    CHECK(ks.nu2.asymmetry() < 1e-12);
    CHECK(ks.eta2.max_abs() > 0.0);
    CHECK(ks.nu2.max_abs() > 0.0);
}

TEST_CASE("two-frequency table matches the bundle integrand") {
    RunConfig cfg = default_config();
    const SpectralBundle bundle = build_fine_bundle(cfg);
    const FreqGrid row(6.0, 120);
    const FreqGrid col(20.0, 400);
    const auto [d2, n2] = two_freq_kernels(bundle, row, col);
    CHECK(d2.kind == TwoFreqKind::d2);
    CHECK(n2.kind == TwoFreqKind::n2);

    for (int i = 0; i < row.n_points(); i += 37) {
        for (int j = 0; j < col.n_points(); j += 61) {
            const double w = row.omega(i);
            const double wp = col.omega(j);
            const std::complex<double> want_d =
                0.5 * bundle.nu_gg_bar.interp(w - wp) * bundle.eta_plus_bar.interp(wp) +
                0.25 * bundle.g_bar.interp(w - wp) * bundle.nu_plus_bar.interp(wp);
            const std::complex<double> want_n(
                0.5 * bundle.nu_gg_bar.interp(w - wp).real() *
                        bundle.nu_plus_bar.interp(wp).real() +
                    bundle.g_bar.interp(w - wp).imag() * bundle.eta_plus_bar.interp(wp).imag(),
                0.0);
            CHECK(std::abs(d2.values(i, j) - want_d) < 1e-12);
            CHECK(std::abs(n2.values(i, j) - want_n) < 1e-12);
        }
    }
}

TEST_CASE("frequency assembly agrees with the two-frequency marginals") {
    RunConfig cfg = default_config();
    const SpectralBundle bundle = build_fine_bundle(cfg);
    const LateFreqKernels lf = kernels_late_freq(bundle);

    // the dressed-propagator resonance is only a few fine-grid steps wide, so
    // the column integral must run on the bundle grid itself; rows are placed
    // on fine-grid nodes so the difference frequencies stay on nodes too
    const double dwf = bundle.g_bar.grid.d_omega();
    const FreqGrid row(0.5 * 100 * 17 * dwf, 100);
    const FreqGrid& col = bundle.g_bar.grid;
    const auto [d2, n2] = two_freq_kernels(bundle, row, col);
    const Spectrum marg_d = two_freq_marginal(d2);
    const Spectrum marg_n = two_freq_marginal(n2);

    std::vector<std::complex<double>> got_d, want_d, got_n, want_n;
    for (int i = 0; i < row.n_points(); ++i) {
        const double w = row.omega(i);
        got_d.push_back(marg_d.at(i));
        want_d.push_back(lf.eta2_bar.interp(w));
        got_n.push_back(marg_n.at(i));
        want_n.push_back(lf.nu2_bar.interp(w));
    }
    CHECK(l2_rel(got_d, want_d) < 1e-6);
    CHECK(l2_rel(got_n, want_n) < 1e-6);
}

TEST_CASE("generalized fluctuation-dissipation identity holds off the resonant line") {
    RunConfig cfg = default_config();
    const SpectralBundle bundle = build_fine_bundle(cfg);
    // nodes placed on the fine bundle grid: all spectra enter at exact nodal
    // values, so the identity residual probes the assembly, not interpolation
    const double dwf = bundle.g_bar.grid.d_omega();
    const FreqGrid row(0.5 * 600 * 10 * dwf, 600);
    const FreqGrid col(0.5 * 600 * 10 * dwf, 600);
    const auto [d2, n2] = two_freq_kernels(bundle, row, col);
    const GenFdrReport rep = check_generalized_fdr(d2, n2, cfg.thermal.T_F, &bundle);
    CHECK(rep.n_admissible > 100000);
    CHECK(rep.max_rel < 1e-9);
    CHECK(rep.rms_rel < 1e-10);
    CHECK(rep.recon_im_eta2_l2 >= 0.0);
    CHECK(rep.recon_im_eta2_l2 < 1e-2);
    CHECK(rep.recon_nu2_l2 >= 0.0);
    CHECK(rep.recon_nu2_l2 < 1e-2);

    CHECK_THROWS_AS(check_generalized_fdr(d2, n2, -1.0), ConfigError);
}

TEST_CASE("compact thermal-difference form of the dissipation spectrum") {
    RunConfig cfg = default_config();
    const SpectralBundle bundle = build_fine_bundle(cfg);
    const LateFreqKernels lf = kernels_late_freq(bundle);
    const Spectrum compact = im_eta2_compact(bundle.g_bar, bundle.eta_plus_bar, cfg.thermal.T_F);

    std::vector<std::complex<double>> got, want;
    const FreqGrid& g = compact.grid;
    for (int j = 0; j < g.n_points(); ++j) {
        if (std::abs(g.omega(j)) > 8.0) continue;
        got.push_back(compact.at(j).imag());
        want.push_back(lf.eta2_bar.at(j).imag());
    }
    CHECK(l2_rel(got, want) < 1e-3);

    CHECK_THROWS_AS(im_eta2_compact(bundle.g_bar, bundle.eta_plus_bar, 0.0), ConfigError);
}

TEST_CASE("under-truncated convolution grids are refused with a remedy") {
    RunConfig cfg = default_config();
    const SpectralBundle bundle = build_fine_bundle(cfg, nullptr, 8.0, 0.01);
    CHECK_THROWS_AS(kernels_late_freq(bundle), NumericsError);
}

TEST_CASE("two-frequency table size cap") {
    RunConfig cfg = default_config();
    const SpectralBundle bundle = build_fine_bundle(cfg);
    CHECK_THROWS_AS(two_freq_kernels(bundle, FreqGrid(10.0, 4000), FreqGrid(10.0, 4000)),
                    NumericsError);
}

TEST_CASE("influence phase vanishes on equal paths and damps differences") {
    RunConfig cfg = default_config();
    cfg.t_max = 10.0;
    cfg.n_steps = 200;
    const KernelSet ks = build_kernel_set(cfg);
    const int n = ks.grid.n_points();

    std::mt19937 rng(4242);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(static_cast<size_t>(n));
        oracles::fill_gaussian(x, rng);
        const std::complex<double> s = influence_action(ks.eta2, ks.nu2, x, x);
        CHECK(s.real() == 0.0);
        CHECK(s.imag() == 0.0);
    }

    // noise positivity: the imaginary part is a nu2 quadratic form
    const double scale = ks.nu2.max_abs() * ks.grid.dt() * ks.grid.dt() * n;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(static_cast<size_t>(n)), xp(static_cast<size_t>(n));
        oracles::fill_gaussian(x, rng);
        oracles::fill_gaussian(xp, rng);
        const std::complex<double> s = influence_action(ks.eta2, ks.nu2, x, xp);
        CHECK(s.imag() > -1e-8 * scale * n);
    }

    std::vector<double> short_path(static_cast<size_t>(n - 1), 0.0);
    std::vector<double> full(static_cast<size_t>(n), 0.0);
    CHECK_THROWS_AS(influence_action(ks.eta2, ks.nu2, short_path, full), ConfigError);
}
