#pragma once
// Config-driven assembly of everything the CLI commands consume: time-domain
// kernel stacks (bath kernels, dressed propagator, internal-state correlators,
// composite kernels) and frequency-domain spectra with their consistency
// checks.

#include "qbm/composite.hpp"
#include "qbm/config.hpp"
#include "qbm/idf.hpp"

namespace qbm {

struct KernelSet {
    TimeGrid grid;
    KernelMode mode{KernelMode::finite};
    Kernel1D eta_minus, nu_minus, eta_plus, nu_plus;
    DressedPropagator prop;
    Kernel1D u, v;   // homogeneous internal solutions
    Kernel2D nu_gg;  // finite: exact double convolution; late: stationary Toeplitz
    Kernel2D qh;     // initial-state correlator (empty in late mode)
    Kernel2D eta2, nu2;
    double t_ref{0.0}; // late mode: reference time of the stationary slice
};

KernelSet build_kernel_set(const RunConfig& cfg);

// stationary two-time kernel from a lag slice, K(t_i, t_j) = slice[|i - j|]
Kernel2D toeplitz_from_slice(const TimeGrid& grid, const std::vector<double>& slice);

struct BundleDiagnostics {
    double omega_r{0.0};
    double pole_width{0.0};
    double nu_gg_dual_residual{0.0}; // |G|^2 nu_minus vs coth * Im G
    FreqGrid grid;
};

// fine internal frequency grid for composite assembly; resolution follows
// min(omega_ir, pole width) and the span follows the bath cutoffs unless
// omega_max / d_omega are forced. Requires lambda_minus > 0.
SpectralBundle build_fine_bundle(const RunConfig& cfg, BundleDiagnostics* diag = nullptr,
                                 double omega_max = 0.0, double d_omega = 0.0);

struct SpectraSet {
    FreqGrid grid;
    Spectrum eta_minus_bar, nu_minus_bar, eta_plus_bar, nu_plus_bar;
    FdrReport fdr_minus, fdr_plus;

    // composite spectra, interpolated from the fine internal bundle onto the
    // output grid; absent (empty) when lambda_minus = 0 where the bare
    // propagator has real-axis poles
    bool composite_available{false};
    Spectrum g_bar, nu_gg_bar, eta2_bar, nu2_bar;
    BundleDiagnostics bundle_diag;
};

SpectraSet build_spectra_set(const RunConfig& cfg);

} // namespace qbm
