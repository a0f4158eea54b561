#include "qbm/langevin.hpp"

#include <cmath>
#include <string>

#include "qbm/errors.hpp"
#include "qbm/hashing.hpp"
#include "qbm/rng.hpp"
#include "qbm/threads.hpp"
#include "qbm/volterra.hpp"

namespace qbm {

NoiseGenerator::NoiseGenerator(const Kernel2D& nu2, double jitter_rel_max) : grid_(nu2.grid) {
    check_dense_budget(grid_, "NoiseGenerator");
    const double scale = nu2.max_abs();
    Eigen::MatrixXd cov = 4.0 * nu2.values;
    factor_ = psd_factorize(cov, jitter_rel_max * 4.0 * scale);
    kernel_hash_ = hash_kernel(nu2);
}

NoiseSample NoiseGenerator::sample(std::uint64_t seed, std::uint64_t index) const {
    const int n = grid_.n_points();
    GaussianStream gauss(substream_seed(seed, index, kernel_hash_));
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = gauss();
    const Eigen::VectorXd xi = factor_.factor * z;
    NoiseSample out;
    out.grid = grid_;
    out.xi.assign(xi.data(), xi.data() + n);
    out.seed = seed;
    out.index = index;
    return out;
}

std::vector<NoiseSample> sample_noise(const Kernel2D& nu2, std::uint64_t seed, int n_traj) {
    if (n_traj < 1) throw ConfigError("sample_noise: n_traj must be positive");
    const NoiseGenerator gen(nu2);
    std::vector<NoiseSample> out(static_cast<std::size_t>(n_traj));
    parallel_chunks(n_traj, [&](int begin, int end) {
        for (int i = begin; i < end; ++i)
            out[static_cast<std::size_t>(i)] = gen.sample(seed, static_cast<std::uint64_t>(i));
    });
    return out;
}

namespace {

void check_mdf_step(const OscillatorSpec& mdf, const TimeGrid& grid, const char* where) {
    if (mdf.frequency * grid.dt() > 1.0)
        throw NumericsError(std::string(where) + ": Omega * dt = " +
                            std::to_string(mdf.frequency * grid.dt()) +
                            " too large; use dt below " + std::to_string(0.5 / mdf.frequency));
}

Trajectory from_result(const TimeGrid& grid, VolterraResult&& r) {
    Trajectory t;
    t.grid = grid;
    t.x = std::move(r.x);
    t.v = std::move(r.v);
    return t;
}

} // namespace

Trajectory solve_mean(const OscillatorSpec& mdf, const Kernel2D& eta2, double x0, double v0) {
    mdf.validate();
    check_mdf_step(mdf, eta2.grid, "solve_mean");
    return from_result(eta2.grid, solve_oscillator_two_time(mdf.mass, mdf.frequency, eta2.values,
                                                            eta2.grid, x0, v0, nullptr));
}

Trajectory solve_stochastic(const OscillatorSpec& mdf, const Kernel2D& eta2,
                            const NoiseSample& noise, double x0, double v0) {
    mdf.validate();
    if (!(noise.grid == eta2.grid))
        throw ConfigError("solve_stochastic: noise sample and kernel grids differ");
    check_mdf_step(mdf, eta2.grid, "solve_stochastic");
    return from_result(eta2.grid, solve_oscillator_two_time(mdf.mass, mdf.frequency, eta2.values,
                                                            eta2.grid, x0, v0, &noise.xi));
}

EnsembleResult ensemble_statistics(const OscillatorSpec& mdf, const Kernel2D& eta2,
                                   const Kernel2D& nu2, double x0, double v0, std::uint64_t seed,
                                   int n_traj) {
    if (n_traj < 2) throw ConfigError("ensemble_statistics: need at least 2 trajectories");
    if (!(eta2.grid == nu2.grid))
        throw ConfigError("ensemble_statistics: eta2 and nu2 grids differ");
    mdf.validate();
    check_mdf_step(mdf, eta2.grid, "ensemble_statistics");

    const NoiseGenerator gen(nu2);
    const int n = eta2.grid.n_points();

    // fixed-size chunks make the floating-point reduction order independent
    // of the thread count
    constexpr int kChunk = 512;
    const int n_chunks = (n_traj + kChunk - 1) / kChunk;
    std::vector<Eigen::VectorXd> sum_x(static_cast<std::size_t>(n_chunks),
                                       Eigen::VectorXd::Zero(n));
    std::vector<Eigen::VectorXd> sum_v(static_cast<std::size_t>(n_chunks),
                                       Eigen::VectorXd::Zero(n));
    std::vector<Eigen::MatrixXd> sum_xx(static_cast<std::size_t>(n_chunks),
                                        Eigen::MatrixXd::Zero(n, n));

    parallel_chunks(n_chunks, [&](int c_begin, int c_end) {
        for (int c = c_begin; c < c_end; ++c) {
            const int t_begin = c * kChunk;
            const int t_end = std::min(n_traj, t_begin + kChunk);
            auto& sx = sum_x[static_cast<std::size_t>(c)];
            auto& sv = sum_v[static_cast<std::size_t>(c)];
            auto& sxx = sum_xx[static_cast<std::size_t>(c)];
            for (int k = t_begin; k < t_end; ++k) {
                const NoiseSample noise = gen.sample(seed, static_cast<std::uint64_t>(k));
                const Trajectory traj = solve_stochastic(mdf, eta2, noise, x0, v0);
                const Eigen::Map<const Eigen::VectorXd> xv(traj.x.data(), n);
                const Eigen::Map<const Eigen::VectorXd> vv(traj.v.data(), n);
                sx += xv;
                sv += vv;
                sxx.selfadjointView<Eigen::Lower>().rankUpdate(xv, 1.0);
            }
        }
    });

    Eigen::VectorXd tot_x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd tot_v = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd tot_xx = Eigen::MatrixXd::Zero(n, n);
    for (int c = 0; c < n_chunks; ++c) {
        tot_x += sum_x[static_cast<std::size_t>(c)];
        tot_v += sum_v[static_cast<std::size_t>(c)];
        tot_xx += sum_xx[static_cast<std::size_t>(c)];
    }
    tot_xx = tot_xx.selfadjointView<Eigen::Lower>();

    EnsembleResult out;
    out.grid = eta2.grid;
    out.n_traj = n_traj;
    const double inv_n = 1.0 / n_traj;
    const Eigen::VectorXd mean = tot_x * inv_n;
    out.cov_xx = (tot_xx - n_traj * mean * mean.transpose()) / (n_traj - 1.0);
    out.mean_x.assign(mean.data(), mean.data() + n);
    const Eigen::VectorXd mean_v = tot_v * inv_n;
    out.mean_v.assign(mean_v.data(), mean_v.data() + n);
    out.se_mean_x.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out.se_mean_x[static_cast<std::size_t>(i)] =
            std::sqrt(std::max(0.0, out.cov_xx(i, i)) * inv_n);
    out.se_cov_xx.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.se_cov_xx(i, j) = std::sqrt(
                std::max(0.0, out.cov_xx(i, i) * out.cov_xx(j, j) +
                                  out.cov_xx(i, j) * out.cov_xx(i, j)) *
                inv_n);
    return out;
}

} // namespace qbm
