#pragma once
// Bath models for the two field channels and their kernels.
//
// Families:
//   ohmic_plus:      J(w) = (lambda^2 w / 2) exp(-w/cutoff)
//   sub_ohmic_minus: J(w) = (lambda^2 / 2) * w/(w^2 + omega_ir^2) * exp(-w/cutoff)
//   discrete:        J(w) = sum_n weight_n * delta(w - w_n), realized as
//                    antisymmetrized Gaussian surrogates of width sigma_delta
//                    for continuum operations
//
// Kernels (natural units, hbar = k_B = 1):
//   eta(tau) = -Theta(tau) int_0^inf J(w) sin(w tau) dw        (dissipation)
//   nu(tau)  =            int_0^inf J(w) coth(w/2T) cos(w tau) dw   (noise)
// Frequency domain, F(w) = int dt e^{+iwt} F(t):
//   Im eta(w) = -(pi/2) J(|w|) sign(w), Re eta by Kramers-Kronig
//   nu(w)     = pi coth(|w|/2T) J(|w|)
// which satisfy the fluctuation-dissipation relation
//   nu(w) = -2 coth(w/2T) Im eta(w).

#include <complex>
#include <string>
#include <vector>

#include "qbm/grids.hpp"
#include "qbm/kernels.hpp"
#include "qbm/spectrum.hpp"

namespace qbm {

enum class BathFamily { sub_ohmic_minus, ohmic_plus, discrete };

const char* to_string(BathFamily f);
BathFamily bath_family_from_string(const std::string& name);

struct DiscreteMode {
    double omega{0.0};
    double weight{0.0};
};

struct BathSpec {
    BathFamily family{BathFamily::ohmic_plus};
    double lambda{0.1};    // coupling strength
    double cutoff{10.0};   // exponential UV cutoff scale
    // IR regulator (sub_ohmic_minus only). The static frequency shift of an
    // oscillator coupled to this family is -2 int J(s)/s ds ~ -lambda^2 pi /
    // (2 omega_ir), so small regulators destabilize the dressed oscillator;
    // the default keeps lambda = 0.1, m = w0 = 1 comfortably stable.
    double omega_ir{0.05};
    std::vector<DiscreteMode> modes;
    double sigma_delta{0.0}; // Gaussian surrogate width for discrete modes
                             // (0 = choose d_omega/2 in grid operations)
    void validate() const;
};

struct ThermalSpec {
    double T_F{1.0}; // field (bath) temperature
    double T_I{1.0}; // initial internal-oscillator temperature
    void validate() const;
};

// sign(w) * coth(|w|/2T); T = 0 gives sign(w); stable near w = 0 for T > 0
double coth_thermal(double w, double t);
// x -> x*coth(x), smooth through x = 0
double xcothx(double x);

// J(w); requires w > 0
double spectral_density(const BathSpec& bath, double omega);

// pointwise kernels
double eta_bath(const BathSpec& bath, double tau);
double nu_bath(const BathSpec& bath, double tau, double t_f);

// sampled kernels on a grid (FFT fast path on dense grids, quadrature or
// closed forms otherwise; the two agree to quadrature tolerance)
Kernel1D eta_bath_kernel(const BathSpec& bath, const TimeGrid& grid);
Kernel1D nu_bath_kernel(const BathSpec& bath, const TimeGrid& grid, double t_f);

// same values under a different extension tag (eta: causal <-> odd view)
Kernel1D with_support(const Kernel1D& k, Support s);

// frequency domain
std::complex<double> eta_bath_freq(const BathSpec& bath, double omega); // pointwise, PV quadrature
Spectrum eta_bath_freq(const BathSpec& bath, const FreqGrid& grid);     // grid Kramers-Kronig
double nu_bath_freq(const BathSpec& bath, double omega, double t_f);    // analytic
Spectrum nu_bath_freq(const BathSpec& bath, const FreqGrid& grid, double t_f);

struct FdrReport {
    std::string identity;
    double max_rel{0.0};
    double rms_rel{0.0};
    int n_points{0};
};

// residual of nu(w) + 2 coth(w/2T) Im eta(w) over the grid, excluding the
// regulator-dominated band |w| <= omega_ir
FdrReport check_bath_fdr(const BathSpec& bath, const FreqGrid& grid, double t_f);
FdrReport check_bath_fdr(const Spectrum& nu, const Spectrum& eta, double t_f, double omega_ir,
                         const std::string& identity);

} // namespace qbm
