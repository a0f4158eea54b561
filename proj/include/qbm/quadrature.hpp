#pragma once
// Adaptive quadrature used for spectral integrals: globally adaptive
// Gauss-Kronrod 7/15 on finite panels, a semi-infinite driver for integrands
// with an exponential frequency cutoff, and a principal-value dispersion
// integral for Kramers-Kronig real parts.

#include <functional>

#include "qbm/errors.hpp"

namespace qbm {

struct IntegralResult {
    double value{0.0};
    double error_bound{0.0};
    long n_evals{0};
};

// Globally adaptive GK7/15 on [a, b]. Stops when the accumulated error bound
// drops below max(abs_tol, rel_tol*|value|); throws NumericsError if the
// evaluation budget is exhausted first (message carries the best estimate).
IntegralResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol, double rel_tol, long max_evals = 2000000);

// \int_{omega_min}^{infty} f(omega) domega for integrands that decay like
// exp(-omega/cutoff) beyond the cutoff scale. osc_period, when positive, is
// the shortest oscillation period of f (e.g. 2*pi/tau for a sin(omega*tau)
// factor); the initial panels are kept below half of it so the adaptive rule
// starts resolved. Truncates at omega where the decay factor reaches eps_tail.
IntegralResult adaptive_spectral_integral(const std::function<double(double)>& f, double omega_min,
                                          double cutoff, double tol, double osc_period = 0.0,
                                          double eps_tail = 1e-16);

// Principal value \int_0^infty g(s) / (s - w) ds with w > 0 inside the range,
// for g with exponential cutoff. Subtracts the pole:
//   P.V. int = int (g(s) - g(w))/(s - w) ds + g(w) * ln((W - w)/w)
// over [0, W] with W the truncation point, plus the tail of g beyond W.
IntegralResult principal_value_integral(const std::function<double(double)>& g, double w,
                                        double cutoff, double tol);

} // namespace qbm
