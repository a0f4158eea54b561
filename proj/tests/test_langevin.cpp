// Langevin engine tests: reproducible noise with the advertised covariance,
// the deterministic limit, linearity in the drive, convergence order of the
// integrator, thread-count invariance of ensemble statistics, and the
// step-size refusal.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "oracles.hpp"
#include "qbm/config.hpp"
#include "qbm/errors.hpp"
#include "qbm/langevin.hpp"
#include "qbm/pipeline.hpp"

using namespace qbm;

namespace {

// smooth positive-definite stationary test covariance
Kernel2D gaussian_cov(const TimeGrid& grid, double amp, double width) {
    Kernel2D k(grid, Symmetry2D::symmetric);
    for (int i = 0; i < grid.n_points(); ++i)
        for (int j = 0; j < grid.n_points(); ++j) {
            const double d = (grid.time(i) - grid.time(j)) / width;
            k.values(i, j) = amp * std::exp(-0.5 * d * d);
        }
    return k;
}

Kernel2D zero_kernel(const TimeGrid& grid) { return Kernel2D(grid, Symmetry2D::symmetric); }

double rms_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

} // namespace

TEST_CASE("noise samples are reproducible and kernel-keyed") {
    const TimeGrid grid(3.1, 31);
    const Kernel2D nu2 = gaussian_cov(grid, 0.7, 1.0);
    const NoiseGenerator gen(nu2);

    const NoiseSample a = gen.sample(99, 4);
    const NoiseSample b = gen.sample(99, 4);
    REQUIRE(a.xi.size() == b.xi.size());
    for (size_t i = 0; i < a.xi.size(); ++i) CHECK(a.xi[i] == b.xi[i]);

    const NoiseSample c = gen.sample(99, 5);
    const NoiseSample d = gen.sample(100, 4);
    double diff_c = 0.0;
    double diff_d = 0.0;
    for (size_t i = 0; i < a.xi.size(); ++i) {
        diff_c = std::max(diff_c, std::abs(a.xi[i] - c.xi[i]));
        diff_d = std::max(diff_d, std::abs(a.xi[i] - d.xi[i]));
    }
    CHECK(diff_c > 1e-3);
    CHECK(diff_d > 1e-3);

    // a rescaled kernel changes the substream key, not just the factor scale
    const Kernel2D nu2b = gaussian_cov(grid, 1.4, 1.0);
    const NoiseGenerator gen_b(nu2b);
    CHECK(gen.kernel_hash() != gen_b.kernel_hash());
    const NoiseSample e = gen_b.sample(99, 4);
    double ratio_spread = 0.0;
    for (size_t i = 1; i < a.xi.size(); ++i)
        if (std::abs(a.xi[i]) > 1e-12)
            ratio_spread = std::max(ratio_spread, std::abs(e.xi[i] / a.xi[i] - std::sqrt(2.0)));
    CHECK(ratio_spread > 1e-3);

    // indefinite input is refused by the factorization
    Kernel2D bad(grid, Symmetry2D::symmetric);
    bad.values = -Eigen::MatrixXd::Identity(grid.n_points(), grid.n_points());
    CHECK_THROWS_AS(NoiseGenerator{bad}, NumericsError);
}

TEST_CASE("empirical noise covariance matches 4 nu2") {
    const TimeGrid grid(3.1, 31);
    const Kernel2D nu2 = gaussian_cov(grid, 0.7, 1.0);
    const NoiseGenerator gen(nu2);
    const int n = grid.n_points();
    const int n_samp = 20000;

    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n_samp; ++k) {
        const NoiseSample s = gen.sample(7, static_cast<std::uint64_t>(k));
        const Eigen::Map<const Eigen::VectorXd> xi(s.xi.data(), n);
        acc += xi * xi.transpose();
    }
    acc /= static_cast<double>(n_samp);

    // Gaussian standard error of a covariance entry: sqrt((C_ii C_jj + C_ij^2)/N)
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double want = 4.0 * nu2.values(i, j);
            const double se = std::sqrt((16.0 * nu2.values(i, i) * nu2.values(j, j) +
                                         want * want) /
                                        n_samp);
            worst = std::max(worst, std::abs(acc(i, j) - want) / se);
        }
    CHECK(worst < 6.0);
}

TEST_CASE("free center-of-mass mean follows the cosine") {
    OscillatorSpec mdf;
    mdf.mass = 1.0;
    mdf.frequency = 0.3;
    const TimeGrid grid(20.0, 2000);
    const Trajectory t = solve_mean(mdf, zero_kernel(grid), 1.0, 0.0);
    double worst_x = 0.0;
    double worst_v = 0.0;
    for (int i = 0; i < grid.n_points(); i += 7) {
        const double tt = grid.time(i);
        worst_x = std::max(worst_x, std::abs(t.x[static_cast<size_t>(i)] - std::cos(0.3 * tt)));
        worst_v = std::max(worst_v,
                           std::abs(t.v[static_cast<size_t>(i)] + 0.3 * std::sin(0.3 * tt)));
    }
    CHECK(worst_x < 1e-4);
    CHECK(worst_v < 1e-4);
}

TEST_CASE("zero noise reproduces the mean trajectory exactly") {
    RunConfig cfg = default_config();
    cfg.t_max = 10.0;
    cfg.n_steps = 100;
    const KernelSet ks = build_kernel_set(cfg);

    NoiseSample quiet;
    quiet.grid = ks.grid;
    quiet.xi.assign(static_cast<size_t>(ks.grid.n_points()), 0.0);
    const Trajectory a = solve_mean(cfg.mdf, ks.eta2, 1.0, 0.25);
    const Trajectory b = solve_stochastic(cfg.mdf, ks.eta2, quiet, 1.0, 0.25);
    for (int i = 0; i < ks.grid.n_points(); ++i) {
        CHECK(a.x[static_cast<size_t>(i)] == b.x[static_cast<size_t>(i)]);
        CHECK(a.v[static_cast<size_t>(i)] == b.v[static_cast<size_t>(i)]);
    }
}

TEST_CASE("response is linear in the drive") {
    RunConfig cfg = default_config();
    cfg.t_max = 10.0;
    cfg.n_steps = 100;
    const KernelSet ks = build_kernel_set(cfg);
    const int n = ks.grid.n_points();

    std::mt19937 rng(11);
    NoiseSample xi1, xi2, xi12, quiet;
    for (NoiseSample* s : {&xi1, &xi2, &xi12, &quiet}) {
        s->grid = ks.grid;
        s->xi.assign(static_cast<size_t>(n), 0.0);
    }
    oracles::fill_gaussian(xi1.xi, rng);
    oracles::fill_gaussian(xi2.xi, rng);
    for (int i = 0; i < n; ++i)
        xi12.xi[static_cast<size_t>(i)] = xi1.xi[static_cast<size_t>(i)] +
                                          xi2.xi[static_cast<size_t>(i)];

    const Trajectory a = solve_stochastic(cfg.mdf, ks.eta2, xi1, 1.0, 0.0);
    const Trajectory b = solve_stochastic(cfg.mdf, ks.eta2, xi2, 1.0, 0.0);
    const Trajectory zero = solve_stochastic(cfg.mdf, ks.eta2, quiet, 1.0, 0.0);
    const Trajectory ab = solve_stochastic(cfg.mdf, ks.eta2, xi12, 1.0, 0.0);

    double worst = 0.0;
    double scale = 0.0;
    for (int i = 0; i < n; ++i) {
        const size_t k = static_cast<size_t>(i);
        worst = std::max(worst, std::abs(a.x[k] + b.x[k] - zero.x[k] - ab.x[k]));
        scale = std::max(scale, std::abs(ab.x[k]));
    }
    CHECK(worst < 1e-12 * std::max(scale, 1.0));
}

TEST_CASE("integrator converges at second order") {
    RunConfig cfg = default_config();
    cfg.t_max = 20.0;

    auto solve_at = [&](int n_steps) {
        RunConfig c = cfg;
        c.n_steps = n_steps;
        const KernelSet ks = build_kernel_set(c);
        return solve_mean(c.mdf, ks.eta2, 1.0, 0.0);
    };
    const Trajectory t1 = solve_at(250);
    const Trajectory t2 = solve_at(500);
    const Trajectory t4 = solve_at(1000);

    // self-convergence at shared nodes; halving dt should quarter the error
    double d12 = 0.0;
    double d24 = 0.0;
    for (int i = 0; i <= 250; ++i) {
        d12 = std::max(d12, std::abs(t1.x[static_cast<size_t>(i)] -
                                     t2.x[static_cast<size_t>(2 * i)]));
        d24 = std::max(d24, std::abs(t2.x[static_cast<size_t>(2 * i)] -
                                     t4.x[static_cast<size_t>(4 * i)]));
    }
    CHECK(d12 / d24 > 3.5);
    CHECK(d12 / d24 < 4.6);
}

TEST_CASE("ensemble statistics are thread-count invariant") {
    RunConfig cfg = default_config();
    cfg.t_max = 10.0;
    cfg.n_steps = 100;
    const KernelSet ks = build_kernel_set(cfg);

    setenv("QBM_THREADS", "1", 1);
    const EnsembleResult serial =
        ensemble_statistics(cfg.mdf, ks.eta2, ks.nu2, 1.0, 0.0, 2024, 600);
    setenv("QBM_THREADS", "4", 1);
    const EnsembleResult parallel =
        ensemble_statistics(cfg.mdf, ks.eta2, ks.nu2, 1.0, 0.0, 2024, 600);
    unsetenv("QBM_THREADS");

    const int n = ks.grid.n_points();
    for (int i = 0; i < n; ++i) {
        CHECK(serial.mean_x[static_cast<size_t>(i)] == parallel.mean_x[static_cast<size_t>(i)]);
        CHECK(serial.mean_v[static_cast<size_t>(i)] == parallel.mean_v[static_cast<size_t>(i)]);
    }
    CHECK((serial.cov_xx - parallel.cov_xx).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ensemble mean tracks the noise-free solution within errors") {
    RunConfig cfg = default_config();
    cfg.t_max = 10.0;
    cfg.n_steps = 100;
    const KernelSet ks = build_kernel_set(cfg);
    const EnsembleResult ens =
        ensemble_statistics(cfg.mdf, ks.eta2, ks.nu2, 1.0, 0.0, 31415, 2000);
    const Trajectory mean = solve_mean(cfg.mdf, ks.eta2, 1.0, 0.0);

    CHECK(ens.n_traj == 2000);
    const double dev = rms_diff(ens.mean_x, mean.x);
    double se = 0.0;
    for (double s : ens.se_mean_x) se += s * s;
    se = std::sqrt(se / static_cast<double>(ens.se_mean_x.size()));
    CHECK(se > 0.0);
    CHECK(dev < 4.0 * se);

    for (int i = 0; i < ks.grid.n_points(); ++i) {
        CHECK(ens.cov_xx(i, i) >= 0.0);
        CHECK(ens.se_cov_xx(i, i) >= 0.0);
    }
    // the initial point is deterministic: zero variance there (up to rounding
    // of the mean-subtraction arithmetic)
    CHECK(std::abs(ens.cov_xx(0, 0)) < 1e-12);
}

TEST_CASE("oversized center-of-mass step is refused") {
    OscillatorSpec mdf;
    mdf.frequency = 0.3;
    const TimeGrid grid(40.0, 10); // dt = 4 -> Omega dt = 1.2
    CHECK_THROWS_AS(solve_mean(mdf, zero_kernel(grid), 1.0, 0.0), NumericsError);

    const TimeGrid fine(40.0, 100);
    NoiseSample s;
    s.grid = grid;
    s.xi.assign(static_cast<size_t>(grid.n_points()), 0.0);
    CHECK_THROWS_AS(solve_stochastic(mdf, zero_kernel(grid), s, 1.0, 0.0), NumericsError);
    CHECK_THROWS_AS(
        ensemble_statistics(mdf, zero_kernel(grid), zero_kernel(grid), 1.0, 0.0, 1, 2),
        NumericsError);
    CHECK_THROWS_AS(
        ensemble_statistics(mdf, zero_kernel(fine), zero_kernel(fine), 1.0, 0.0, 1, 1),
        ConfigError);
    CHECK_THROWS_AS(
        ensemble_statistics(mdf, zero_kernel(fine), zero_kernel(grid), 1.0, 0.0, 1, 4),
        ConfigError);
}
