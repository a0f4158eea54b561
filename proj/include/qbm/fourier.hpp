#pragma once
// Transforms between lag kernels and spectra.
//
// fourier_of_kernel evaluates F(omega_j) = int dt e^{+i omega_j t} K(t) by a
// trapezoid sum over the sampled kernel with Euler-Maclaurin end corrections.
// When the requested frequency grid is commensurate with 2*pi/(N*dt) the sum
// collapses onto an FFT; otherwise it is evaluated directly. Both paths give
// the same sum to round-off (unit tested).

#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "qbm/kernels.hpp"
#include "qbm/spectrum.hpp"

namespace qbm {

enum class Window { none, hann };

Spectrum fourier_of_kernel(const Kernel1D& kernel, const FreqGrid& grid,
                           Window window = Window::none);

// f(t) = int domega/(2 pi) e^{-i omega t} F(omega), trapezoid over the grid
std::vector<std::complex<double>> inverse_fourier(const Spectrum& spectrum,
                                                  const std::vector<double>& times);

// [A * B](omega) = int domega'/(2 pi) A(omega - omega') B(omega'), trapezoid
// over the shared grid, out-of-grid values treated as zero (tails must have
// decayed; see spectrum_tail_fraction)
Spectrum freq_convolution(const Spectrum& a, const Spectrum& b);

// max|values| over the outer `fraction` of each grid end, relative to the
// global max; estimates how badly a convolution would truncate
double spectrum_tail_fraction(const Spectrum& s, double fraction = 0.05);

// Kramers-Kronig on the grid: given Im F on a symmetric grid (F analytic in
// the upper half plane, Im F -> 0 at the grid edges), returns
// Re F(w_i) = (1/pi) P.V. int Im F(w') / (w' - w_i) dw'
// evaluated by pole subtraction + trapezoid, with the principal-value window
// term Im F(w_i) * ln((W - w_i)/(W + w_i)). O(n log n) via FFT.
std::vector<double> kramers_kronig_real(const FreqGrid& grid, const std::vector<double>& im_values);

// Fast builder for stationary kernels on dense lag grids: given a spectral
// function f(omega) sampled at omega_m = m * 2*pi/(n_fft*dt), returns
//   cos_part[k] = int_0^inf f(w) cos(w tau_k) dw
//   sin_part[k] = int_0^inf f(w) sin(w tau_k) dw
// for tau_k = k*dt, k = 0..n_lags-1, via one length-n_fft FFT (trapezoid in
// omega, zero-endpoint correction included). Requires n_lags <= n_fft/2 and
// f negligible beyond the FFT Nyquist pi/dt.
struct LagTransform {
    std::vector<double> cos_part;
    std::vector<double> sin_part;
};
LagTransform lag_kernel_from_spectral(const std::function<double(double)>& f, double dt,
                                      int n_lags, long n_fft, double omega_sample_max);

// FFT linear convolution / correlation of real sequences:
//   convolution c[k] = sum_j a[j] b[k-j],     k = 0 .. na+nb-2
//   correlation c[k] = sum_l y[l] x[k+l],     k = 0 .. nx-1
std::vector<double> linear_convolution(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> linear_correlation(const std::vector<double>& y, const std::vector<double>& x);

} // namespace qbm
