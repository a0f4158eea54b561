#pragma once
// Integro-differential oscillator solver for equations of the form
//   m ( x''(t) + w0^2 x(t) ) + 2 \int_0^t K(t, s) x(s) ds = F(t)
// with K either stationary (K(t,s) = K(t-s), sampled at lags) or a dense
// two-time kernel.
//
// Scheme: trapezoidal predictor-corrector on the memory integral combined
// with the exact rotation of the local oscillator (variation of constants
// with the non-local forcing taken linear across each step). The step is
// exact for K = 0, F = 0 at any dt and globally second order in the memory
// quadrature. Because the kernels here vanish at zero lag the corrector pass
// coincides with the first pass; kernels with K(t,t) != 0 get one fixed-point
// correction of the implicit diagonal term.

#include <Eigen/Dense>
#include <vector>

#include "qbm/grids.hpp"

namespace qbm {

struct VolterraResult {
    std::vector<double> x;
    std::vector<double> v;
};

// stationary kernel: kernel_lags[k] = K(k*dt), needs n_steps+1 entries
VolterraResult solve_oscillator_stationary(double mass, double omega0,
                                           const std::vector<double>& kernel_lags,
                                           const TimeGrid& grid, double x0, double v0,
                                           const std::vector<double>* forcing = nullptr);

// two-time kernel: kernel(i, j) = K(t_i, t_j), only j <= i is read
VolterraResult solve_oscillator_two_time(double mass, double omega0,
                                         const Eigen::MatrixXd& kernel, const TimeGrid& grid,
                                         double x0, double v0,
                                         const std::vector<double>* forcing = nullptr);

} // namespace qbm
