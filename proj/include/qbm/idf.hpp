#pragma once
// Internal-oscillator dynamics dressed by the sub-ohmic channel: causal
// response G, homogeneous solutions (u, v), initial-state correlator, and the
// dressed noise correlator nu_GG in both time and frequency domain.
//
// G solves m (G'' + w0^2 G) + 2 \int_0^t eta_minus(t-s) G(s) ds = 0 with
// G(0) = 0, G'(0) = 1/m; in frequency domain
// G(w) = 1 / ( m (w0^2 - w^2) + 2 eta_minus(w) ).

#include <complex>
#include <utility>
#include <vector>

#include "qbm/bath.hpp"
#include "qbm/kernels.hpp"
#include "qbm/spectrum.hpp"

namespace qbm {

struct OscillatorSpec {
    double mass{1.0};
    double frequency{1.0};
    void validate() const {
        if (!(mass > 0.0)) throw ConfigError("oscillator: mass must be positive");
        if (!(frequency > 0.0)) throw ConfigError("oscillator: frequency must be positive");
    }
};

struct PoleDiagnostics {
    double omega_r{0.0};    // renormalized frequency
    double decay_rate{0.0}; // perturbative pole width -Im eta(w_R)/(m w_R)
};

struct DressedPropagator {
    OscillatorSpec osc;
    TimeGrid grid;
    std::vector<double> g; // response G(t_k)
    Spectrum g_bar;        // frequency-domain propagator (empty if not built)
    PoleDiagnostics poles;

    Kernel1D g_kernel() const {
        Kernel1D k(grid, Support::causal);
        k.values = g;
        return k;
    }
    // theta-free odd extension view used in the symmetric kernel products
    Kernel1D g_odd() const {
        Kernel1D k(grid, Support::odd);
        k.values = g;
        return k;
    }
};

// pointwise dressed propagator; throws NumericsError on a real-axis pole
// (lambda = 0 at |w| = w0)
std::complex<double> green_freq(const OscillatorSpec& osc, const BathSpec& bath_minus, double omega);
Spectrum green_freq(const OscillatorSpec& osc, const BathSpec& bath_minus, const FreqGrid& grid);

// w_R(w)^2 = w0^2 + 2 Re eta_minus(w)/m; throws NumericsError if the
// renormalized square is non-positive (overcritical coupling). The static
// value w_R(0) decides stability: Re eta_minus(0) = -int J(s)/s ds, so a
// positive static stiffness m w0^2 - 2 int J/s is exactly the absence of a
// growing real mode in the response.
double renormalized_frequency(const OscillatorSpec& osc, const BathSpec& bath_minus, double omega);
// convenience overload at the bare frequency w = w0
double renormalized_frequency(const OscillatorSpec& osc, const BathSpec& bath_minus);

// Volterra solve of G; also attaches the frequency-domain propagator on
// freq_grid when given (skipped for lambda = 0, where the real-axis poles
// make the grid evaluation ill-defined)
DressedPropagator green_time(const OscillatorSpec& osc, const BathSpec& bath_minus,
                             const TimeGrid& grid, const FreqGrid* freq_grid = nullptr);

// homogeneous solutions: u(0) = 1, u'(0) = 0 and v(0) = 0, v'(0) = 1, so the
// homogeneous internal coordinate is Q_h(t) = Q_i u(t) + (Pi_i/m) v(t)
std::pair<Kernel1D, Kernel1D> homogeneous_basis(const OscillatorSpec& osc,
                                                const BathSpec& bath_minus, const TimeGrid& grid);

// thermal Wigner moments of the initial internal state (sigma_QP = 0)
struct WignerMoments {
    double sigma_qq{0.0};
    double sigma_pp{0.0};
};
WignerMoments initial_moments(const OscillatorSpec& osc, double t_i);

// <<Q_h(t1) Q_h(t2)>> = sigma_qq u(t1)u(t2) + sigma_pp/m^2 v(t1)v(t2)
Kernel2D initial_correlator(const OscillatorSpec& osc, double t_i, const Kernel1D& u,
                            const Kernel1D& v);

// nu_GG(t1,t2) = int_0^t1 int_0^t2 G(t1-s1) nu_minus(s1-s2) G(t2-s2) ds1 ds2
// (dense; trapezoid weights; symmetric by construction)
Kernel2D nu_gg_finite(const Kernel1D& g, const Kernel1D& nu_minus, const TimeGrid& grid);

// stationary slice nu_GG(t_ref + tau_j, t_ref), j = 0..n_window, evaluated by
// two FFT convolutions; g and nu_minus_lags must extend to i_ref + n_window
std::vector<double> nu_gg_stationary(const std::vector<double>& g, double dt, int i_ref,
                                     int n_window, const std::vector<double>& nu_minus_lags);

// frequency domain: primary = |G|^2 nu_minus, cross-check = coth(w/2T) Im G
struct NuGGFreq {
    Spectrum primary;
    Spectrum via_fdr;
    double max_rel_residual{0.0};
};
NuGGFreq nu_gg_freq(const Spectrum& g_bar, const Spectrum& nu_minus_bar, double t_f);

} // namespace qbm
