#pragma once
// Non-Markovian Langevin dynamics for the center-of-mass coordinate,
//   M (X'' + Omega^2 X) + 2 int_0^t eta2(t,s) X(s) ds = xi(t),
// with Gaussian force noise of covariance <xi(t) xi(s)> = 4 nu2(t,s) realized
// through a dense Cholesky factor. Trajectories are reproducible from
// (seed, trajectory index, grid, kernel hash) independent of thread count.

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "qbm/idf.hpp"
#include "qbm/kernels.hpp"
#include "qbm/psd.hpp"

namespace qbm {

struct NoiseSample {
    TimeGrid grid;
    std::vector<double> xi;
    std::uint64_t seed{0};
    std::uint64_t index{0};
};

// factorizes 4 nu2 once and hands out per-trajectory samples from
// independent substreams
class NoiseGenerator {
  public:
    explicit NoiseGenerator(const Kernel2D& nu2, double jitter_rel_max = 1e-8);

    NoiseSample sample(std::uint64_t seed, std::uint64_t index) const;

    const TimeGrid& grid() const { return grid_; }
    const PsdFactor& factor() const { return factor_; }
    std::uint64_t kernel_hash() const { return kernel_hash_; }

  private:
    TimeGrid grid_;
    PsdFactor factor_;
    std::uint64_t kernel_hash_{0};
};

std::vector<NoiseSample> sample_noise(const Kernel2D& nu2, std::uint64_t seed, int n_traj);

struct Trajectory {
    TimeGrid grid;
    std::vector<double> x;
    std::vector<double> v;
};

// noise-free mean evolution from (x0, v0)
Trajectory solve_mean(const OscillatorSpec& mdf, const Kernel2D& eta2, double x0, double v0);

// one stochastic trajectory driven by a prepared noise sample
Trajectory solve_stochastic(const OscillatorSpec& mdf, const Kernel2D& eta2,
                            const NoiseSample& noise, double x0, double v0);

struct EnsembleResult {
    TimeGrid grid;
    int n_traj{0};
    std::vector<double> mean_x;
    std::vector<double> mean_v;
    Eigen::MatrixXd cov_xx;   // unbiased two-time covariance of X
    std::vector<double> se_mean_x; // standard error of mean_x
    Eigen::MatrixXd se_cov_xx;     // Gaussian standard error of cov_xx entries
};

// runs n_traj (>= 2) trajectories and accumulates mean and two-time
// covariance with a thread-count-independent reduction order
EnsembleResult ensemble_statistics(const OscillatorSpec& mdf, const Kernel2D& eta2,
                                   const Kernel2D& nu2, double x0, double v0, std::uint64_t seed,
                                   int n_traj);

} // namespace qbm
