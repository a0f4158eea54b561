#pragma once
// Cholesky factorization of (nearly) positive-semidefinite covariance
// matrices, with a diagonal jitter ladder for matrices whose smallest
// eigenvalues sit at round-off level.

#include <Eigen/Dense>

namespace qbm {

struct PsdFactor {
    Eigen::MatrixXd factor;   // lower-triangular F with F F^T = K + jitter*I
    double jitter{0.0};       // smallest ladder value that succeeded
    double min_eig_estimate{0.0}; // estimate of the smallest eigenvalue of K
};

// Factorizes K (symmetric within 1e-8 relative). Tries jitter values
// 0, jitter_max*1e-6, 1e-5, ..., jitter_max; throws NumericsError naming the
// most negative eigenvalue if none succeeds.
PsdFactor psd_factorize(const Eigen::MatrixXd& k, double jitter_max);

} // namespace qbm
