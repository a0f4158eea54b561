#pragma once
// Second-order composite kernels for the center-of-mass coordinate: the
// dissipation kernel eta2 and noise kernel nu2 built from the plus-channel
// bath kernels, the dressed internal propagator, and the internal-state
// correlators.
//
// Time domain (tau = t1 - t2; eta_plus and g enter as theta-free odd
// extensions, the causal mask is applied to the assembled kernel):
//   eta2(t1,t2) = Theta(tau) [ (1/2) eta_plus(tau) {nu_GG + QQ}(t1,t2)
//                              + (1/4) nu_plus(tau) g(tau) ]
//   nu2(t1,t2)  = (1/2) nu_plus(tau) {nu_GG + QQ}(t1,t2)
//                 - (1/4) eta_plus(tau) g(tau)
// Frequency domain (stationary late-time kernels):
//   eta2(w) = (1/2)[nu_GG * eta_plus](w) + (1/4)[G * nu_plus](w)
//   nu2(w)  = (1/2)[nu_GG * nu_plus](w) + [Im G * Im eta_plus](w)
// with * the (1/2pi) frequency convolution. The two-frequency integrands
//   D2(w,w') = (1/2) nu_GG(w-w') eta_plus(w') + (1/4) G(w-w') nu_plus(w')
//   N2(w,w') = (1/2) nu_GG(w-w') nu_plus(w') + Im G(w-w') Im eta_plus(w')
// satisfy the generalized fluctuation-dissipation identity
//   N2(w,w') = 2 coth[(w - 2w')/2T_F] Im D2(w,w')
// away from the w = 2w' line.

#include <complex>

#include "qbm/bath.hpp"
#include "qbm/idf.hpp"
#include "qbm/kernels.hpp"
#include "qbm/spectrum.hpp"

namespace qbm {

struct CompositeKernels {
    Kernel2D eta2; // causal in t1 - t2
    Kernel2D nu2;  // symmetric
};

// time-domain assembly; qh_corr = nullptr drops the initial-state term
// (late-time form). eta_plus/nu_plus/g are lag kernels on the same grid.
Kernel2D eta2_time(const Kernel1D& eta_plus, const Kernel1D& nu_plus, const Kernel2D& nu_gg,
                   const Kernel2D* qh_corr, const Kernel1D& g);
Kernel2D nu2_time(const Kernel1D& eta_plus, const Kernel1D& nu_plus, const Kernel2D& nu_gg,
                  const Kernel2D* qh_corr, const Kernel1D& g);

// all 1-D spectra a frequency-domain assembly needs, on one shared fine grid
struct SpectralBundle {
    Spectrum g_bar;
    Spectrum eta_plus_bar;
    Spectrum nu_plus_bar;
    Spectrum nu_gg_bar;
    double t_f{0.0};
};

struct LateFreqKernels {
    Spectrum eta2_bar;
    Spectrum nu2_bar; // real part carries the kernel; imaginary checked small
};

// frequency-domain assembly; refuses grids whose edge tails exceed tail_tol
// (an under-truncated convolution), naming the omega_max that would do
LateFreqKernels kernels_late_freq(const SpectralBundle& bundle, double tail_tol = 1e-3);

enum class TwoFreqKind { d2, n2 };

struct TwoFreqKernel {
    FreqGrid row_grid; // w
    FreqGrid col_grid; // w'
    TwoFreqKind kind{TwoFreqKind::d2};
    Eigen::MatrixXcd values;
    double interp_error_bound{0.0}; // bound on the off-grid interpolation error
};

// tabulates D2 and N2 on (row_grid x col_grid), values interpolated from the
// bundle's fine grid at the difference frequencies
std::pair<TwoFreqKernel, TwoFreqKernel> two_freq_kernels(const SpectralBundle& bundle,
                                                         const FreqGrid& row_grid,
                                                         const FreqGrid& col_grid);

// marginal (d_omega'/2pi) sum over the column grid -> spectrum on the row grid
Spectrum two_freq_marginal(const TwoFreqKernel& k);

struct GenFdrReport {
    double max_rel{0.0}; // pointwise identity residual over the admissible set
    double rms_rel{0.0};
    int n_admissible{0};
    // change-of-variables reconstructions vs the direct marginals (relative L2);
    // negative when not evaluated (no bundle given)
    double recon_im_eta2_l2{-1.0};
    double recon_nu2_l2{-1.0};
};

// pointwise residual of N2 = 2 coth[(w-2w')/2T] Im D2 over |w - 2w'| >= the
// grid spacing; with a bundle, also reconstructs Im eta2 and nu2 through the
// w' -> (w - w)/2 change of variables and compares against the marginals
GenFdrReport check_generalized_fdr(const TwoFreqKernel& d2, const TwoFreqKernel& n2, double t,
                                   const SpectralBundle* bundle = nullptr);

// compact one-integral form of the dissipation spectrum,
//   Im eta2(w) = int dw'/2pi (1/2)[coth((w-w')/2T) - coth(w'/2T)]
//                Im G(w-w') Im eta_plus(w'),
// requires T > 0; returns a purely imaginary spectrum
Spectrum im_eta2_compact(const Spectrum& g_bar, const Spectrum& eta_plus_bar, double t);

// influence-phase quadratic form for a path pair (trapezoid weights); the
// real part couples the difference to the mean path through eta2, the
// imaginary part is the nu2 difference-difference form. Vanishes identically
// for x = xp.
std::complex<double> influence_action(const Kernel2D& eta2, const Kernel2D& nu2,
                                      const std::vector<double>& x, const std::vector<double>& xp);

} // namespace qbm
