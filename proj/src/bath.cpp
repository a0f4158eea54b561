#include "qbm/bath.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qbm/fourier.hpp"
#include "qbm/quadrature.hpp"
#include "qbm/threads.hpp"

namespace qbm {
namespace {

constexpr double kPi = std::numbers::pi;

// lag count beyond which sampled kernels switch from per-lag quadrature to the
// single-FFT builder
constexpr int kFftKernelThreshold = 1025;

double gauss(double x, double sigma) {
    const double z = x / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * kPi));
}

// antisymmetrized Gaussian surrogate for a delta pair at +-w_n
double surrogate_density(const std::vector<DiscreteMode>& modes, double sigma, double w) {
    double j = 0.0;
    for (const auto& m : modes) j += m.weight * (gauss(w - m.omega, sigma) - gauss(w + m.omega, sigma));
    return j;
}

double discrete_sigma(const BathSpec& bath, double fallback) {
    return bath.sigma_delta > 0.0 ? bath.sigma_delta : fallback;
}

double max_mode_freq(const BathSpec& bath) {
    double m = 0.0;
    for (const auto& mode : bath.modes) m = std::max(m, mode.omega);
    return m;
}

void require_ir_regular(const BathSpec& bath, const char* what) {
    if (bath.family == BathFamily::sub_ohmic_minus && !(bath.omega_ir > 0.0)) {
        std::ostringstream msg;
        msg << what
            << ": sub_ohmic_minus with omega_ir = 0 is infrared-divergent here; set omega_ir > 0";
        throw NumericsError(msg.str());
    }
}

// J(w)*coth(w/2T), stable through w = 0 (limit 2T * J(w)/w)
double density_times_coth(const BathSpec& bath, double w, double t_f) {
    if (w <= 0.0) {
        // continuum families vanish fast enough for the w = 0 limit below
        if (w < 0.0) throw NumericsError("density_times_coth: negative frequency");
    }
    switch (bath.family) {
        case BathFamily::ohmic_plus: {
            const double damp = std::exp(-w / bath.cutoff);
            if (t_f <= 0.0) return 0.5 * bath.lambda * bath.lambda * w * damp;
            // w*coth(w/2T) = 2T * xcothx(w/2T)
            return 0.5 * bath.lambda * bath.lambda * 2.0 * t_f * xcothx(0.5 * w / t_f) * damp;
        }
        case BathFamily::sub_ohmic_minus: {
            const double damp = std::exp(-w / bath.cutoff);
            const double lor = 1.0 / (w * w + bath.omega_ir * bath.omega_ir);
            if (t_f <= 0.0) return 0.5 * bath.lambda * bath.lambda * w * lor * damp;
            return 0.5 * bath.lambda * bath.lambda * 2.0 * t_f * xcothx(0.5 * w / t_f) * lor * damp;
        }
        case BathFamily::discrete: {
            const double sigma = discrete_sigma(bath, 0.0);
            if (!(sigma > 0.0))
                throw ConfigError("discrete bath: continuum evaluation needs sigma_delta > 0");
            if (w == 0.0) return 0.0; // antisymmetrized surrogate vanishes linearly
            return coth_thermal(w, t_f) * surrogate_density(bath.modes, sigma, w);
        }
    }
    return 0.0;
}

} // namespace

const char* to_string(BathFamily f) {
    switch (f) {
        case BathFamily::sub_ohmic_minus: return "sub_ohmic_minus";
        case BathFamily::ohmic_plus: return "ohmic_plus";
        case BathFamily::discrete: return "discrete";
    }
    return "?";
}

BathFamily bath_family_from_string(const std::string& name) {
    if (name == "sub_ohmic_minus") return BathFamily::sub_ohmic_minus;
    if (name == "ohmic_plus") return BathFamily::ohmic_plus;
    if (name == "discrete") return BathFamily::discrete;
    throw ConfigError("unknown bath family '" + name + "'");
}

void BathSpec::validate() const {
    if (!(lambda >= 0.0)) throw ConfigError("bath: lambda must be non-negative");
    if (family != BathFamily::discrete && !(cutoff > 0.0))
        throw ConfigError("bath: cutoff must be positive");
    if (!(omega_ir >= 0.0)) throw ConfigError("bath: omega_ir must be non-negative");
    if (family == BathFamily::discrete) {
        if (modes.empty()) throw ConfigError("discrete bath: at least one mode required");
        for (const auto& m : modes) {
            if (!(m.omega > 0.0)) throw ConfigError("discrete bath: mode frequencies must be positive");
            if (!(m.weight >= 0.0)) throw ConfigError("discrete bath: mode weights must be non-negative");
        }
        if (sigma_delta < 0.0) throw ConfigError("discrete bath: sigma_delta must be non-negative");
    }
}

void ThermalSpec::validate() const {
    if (!(T_F >= 0.0)) throw ConfigError("thermal: T_F must be non-negative");
    if (!(T_I >= 0.0)) throw ConfigError("thermal: T_I must be non-negative");
}

double xcothx(double x) {
    const double ax = std::abs(x);
    if (ax < 1e-4) {
        const double x2 = x * x;
        return 1.0 + x2 / 3.0 - x2 * x2 / 45.0;
    }
    return x / std::tanh(x);
}

double coth_thermal(double w, double t) {
    if (t < 0.0) throw ConfigError("coth_thermal: negative temperature");
    if (w == 0.0) return 0.0; // sign(0) = 0 convention
    if (t == 0.0) return w > 0.0 ? 1.0 : -1.0;
    const double s = w > 0.0 ? 1.0 : -1.0;
    return s / std::tanh(0.5 * std::abs(w) / t);
}

double spectral_density(const BathSpec& bath, double omega) {
    if (!(omega > 0.0)) throw ConfigError("spectral_density: omega must be positive");
    switch (bath.family) {
        case BathFamily::ohmic_plus:
            return 0.5 * bath.lambda * bath.lambda * omega * std::exp(-omega / bath.cutoff);
        case BathFamily::sub_ohmic_minus:
            return 0.5 * bath.lambda * bath.lambda * omega /
                   (omega * omega + bath.omega_ir * bath.omega_ir) * std::exp(-omega / bath.cutoff);
        case BathFamily::discrete: {
            const double sigma = discrete_sigma(bath, 0.0);
            if (!(sigma > 0.0))
                throw ConfigError("discrete bath: pointwise spectral density needs sigma_delta > 0");
            return surrogate_density(bath.modes, sigma, omega);
        }
    }
    return 0.0;
}

double eta_bath(const BathSpec& bath, double tau) {
    if (tau <= 0.0) return 0.0; // causal; Theta(0) * 0 at tau = 0
    const double l2 = bath.lambda * bath.lambda;
    switch (bath.family) {
        case BathFamily::ohmic_plus: {
            const double lt = bath.cutoff * tau;
            const double d = 1.0 + lt * lt;
            return -l2 * bath.cutoff * bath.cutoff * bath.cutoff * tau / (d * d);
        }
        case BathFamily::sub_ohmic_minus: {
            if (bath.omega_ir == 0.0) return -0.5 * l2 * std::atan(bath.cutoff * tau);
            auto f = [&](double w) { return spectral_density(bath, w) * std::sin(w * tau); };
            auto r = adaptive_spectral_integral(f, 0.0, bath.cutoff, 1e-12 * std::max(1.0, l2),
                                                2.0 * kPi / tau);
            return -r.value;
        }
        case BathFamily::discrete: {
            const double sigma = discrete_sigma(bath, 0.0);
            const double damp = sigma > 0.0 ? std::exp(-0.5 * sigma * sigma * tau * tau) : 1.0;
            double sum = 0.0;
            for (const auto& m : bath.modes) sum += m.weight * std::sin(m.omega * tau);
            return -sum * damp;
        }
    }
    return 0.0;
}

double nu_bath(const BathSpec& bath, double tau, double t_f) {
    const double l2 = bath.lambda * bath.lambda;
    const double atau = std::abs(tau); // even kernel
    switch (bath.family) {
        case BathFamily::ohmic_plus: {
            if (t_f == 0.0) {
                const double lt = bath.cutoff * atau;
                const double d = 1.0 + lt * lt;
                return 0.5 * l2 * bath.cutoff * bath.cutoff * (1.0 - lt * lt) / (d * d);
            }
            auto f = [&](double w) { return density_times_coth(bath, w, t_f) * std::cos(w * atau); };
            auto r = adaptive_spectral_integral(f, 0.0, bath.cutoff,
                                                1e-12 * std::max(1.0, l2 * (bath.cutoff + t_f)),
                                                atau > 0.0 ? 2.0 * kPi / atau : 0.0);
            return r.value;
        }
        case BathFamily::sub_ohmic_minus: {
            require_ir_regular(bath, "nu_bath");
            auto f = [&](double w) { return density_times_coth(bath, w, t_f) * std::cos(w * atau); };
            auto r = adaptive_spectral_integral(
                f, 0.0, bath.cutoff,
                1e-12 * std::max(1.0, l2 * (1.0 + t_f) / (bath.omega_ir * bath.omega_ir)),
                atau > 0.0 ? 2.0 * kPi / atau : 0.0);
            return r.value;
        }
        case BathFamily::discrete: {
            const double sigma = discrete_sigma(bath, 0.0);
            const double damp = sigma > 0.0 ? std::exp(-0.5 * sigma * sigma * tau * tau) : 1.0;
            double sum = 0.0;
            for (const auto& m : bath.modes)
                sum += m.weight * coth_thermal(m.omega, t_f) * std::cos(m.omega * tau);
            return sum * damp;
        }
    }
    return 0.0;
}

namespace {

// FFT length that resolves the sharpest spectral feature (which also makes the
// lag periodization window long enough for the slow kernel tails); 0 if the
// required length is impractical and per-lag quadrature should be used instead
long fft_kernel_length(const BathSpec& bath, double dt, int n_lags, double t_f) {
    double feature = bath.cutoff;
    if (bath.family == BathFamily::sub_ohmic_minus) feature = std::min(feature, bath.omega_ir);
    if (t_f > 0.0) feature = std::min(feature, std::max(t_f, 1e-3));
    const double dw_target = feature / 30.0;
    long n_fft = 1;
    while (2.0 * kPi / (static_cast<double>(n_fft) * dt) > dw_target || n_fft < 8L * n_lags) {
        n_fft <<= 1;
        if (n_fft > (1L << 23)) return 0;
    }
    return n_fft;
}

// shared FFT fast path for dense lag grids
Kernel1D sampled_kernel_fft(const BathSpec& bath, const TimeGrid& grid, double t_f, bool noise,
                            long n_fft) {
    const double dt = grid.dt();
    const int n_lags = grid.n_points();
    const double w_max = bath.cutoff * 45.0;
    auto f = [&](double w) {
        return noise ? density_times_coth(bath, w, t_f)
                     : (w > 0.0 ? spectral_density(bath, w) : 0.0);
    };
    auto lt = lag_kernel_from_spectral(f, dt, n_lags, n_fft, w_max);
    Kernel1D out(grid, noise ? Support::even : Support::causal);
    for (int k = 0; k < n_lags; ++k)
        out.values[static_cast<size_t>(k)] =
            noise ? lt.cos_part[static_cast<size_t>(k)] : -lt.sin_part[static_cast<size_t>(k)];
    return out;
}

} // namespace

Kernel1D eta_bath_kernel(const BathSpec& bath, const TimeGrid& grid) {
    bath.validate();
    if (bath.lambda == 0.0 && bath.family != BathFamily::discrete)
        return Kernel1D(grid, Support::causal);
    const bool needs_quadrature =
        bath.family == BathFamily::sub_ohmic_minus && bath.omega_ir > 0.0;
    if (needs_quadrature && grid.n_points() > kFftKernelThreshold) {
        const long n_fft = fft_kernel_length(bath, grid.dt(), grid.n_points(), 0.0);
        if (n_fft > 0) return sampled_kernel_fft(bath, grid, 0.0, false, n_fft);
    }
    Kernel1D out(grid, Support::causal);
    parallel_chunks(grid.n_points(), [&](long a, long b) {
        for (long k = a; k < b; ++k)
            out.values[static_cast<size_t>(k)] = eta_bath(bath, grid.time(static_cast<int>(k)));
    });
    return out;
}

Kernel1D nu_bath_kernel(const BathSpec& bath, const TimeGrid& grid, double t_f) {
    bath.validate();
    if (bath.family == BathFamily::sub_ohmic_minus) require_ir_regular(bath, "nu_bath_kernel");
    if (bath.lambda == 0.0 && bath.family != BathFamily::discrete)
        return Kernel1D(grid, Support::even);
    const bool closed_form =
        (bath.family == BathFamily::ohmic_plus && t_f == 0.0) || bath.family == BathFamily::discrete;
    if (!closed_form && grid.n_points() > kFftKernelThreshold) {
        const long n_fft = fft_kernel_length(bath, grid.dt(), grid.n_points(), t_f);
        if (n_fft > 0) return sampled_kernel_fft(bath, grid, t_f, true, n_fft);
    }
    Kernel1D out(grid, Support::even);
    parallel_chunks(grid.n_points(), [&](long a, long b) {
        for (long k = a; k < b; ++k)
            out.values[static_cast<size_t>(k)] = nu_bath(bath, grid.time(static_cast<int>(k)), t_f);
    });
    return out;
}

Kernel1D with_support(const Kernel1D& k, Support s) {
    Kernel1D out = k;
    out.support = s;
    return out;
}

std::complex<double> eta_bath_freq(const BathSpec& bath, double omega) {
    bath.validate();
    const double aw = std::abs(omega);
    const double sgn = omega > 0.0 ? 1.0 : (omega < 0.0 ? -1.0 : 0.0);
    const double im = aw > 0.0 ? -0.5 * kPi * spectral_density(bath, aw) * sgn : 0.0;

    double cutoff = bath.cutoff;
    if (bath.family == BathFamily::discrete)
        cutoff = max_mode_freq(bath) + 10.0 * discrete_sigma(bath, 1e-3);
    double re;
    if (aw == 0.0) {
        require_ir_regular(bath, "eta_bath_freq at omega = 0");
        auto f = [&](double s) { return spectral_density(bath, s) / s; };
        re = -adaptive_spectral_integral(f, 0.0, cutoff, 1e-11).value;
    } else {
        // -P int J(s) s/(s^2-w^2) ds = -(1/2w)[P int g/(s-w) - int g/(s+w)], g = J*s
        auto g = [&](double s) { return s > 0.0 ? spectral_density(bath, s) * s : 0.0; };
        auto pv = principal_value_integral(g, aw, cutoff, 1e-11);
        auto reg = adaptive_spectral_integral([&](double s) { return g(s) / (s + aw); }, 0.0, cutoff,
                                              1e-11);
        re = -(pv.value - reg.value) / (2.0 * aw);
    }
    return {re, im};
}

Spectrum eta_bath_freq(const BathSpec& bath, const FreqGrid& grid) {
    bath.validate();
    if (bath.family == BathFamily::sub_ohmic_minus)
        require_ir_regular(bath, "eta_bath_freq on a grid");
    BathSpec b = bath;
    if (b.family == BathFamily::discrete && !(b.sigma_delta > 0.0))
        b.sigma_delta = 0.5 * grid.d_omega();
    std::vector<double> im(static_cast<size_t>(grid.n_points()), 0.0);
    for (int j = 0; j < grid.n_points(); ++j) {
        const double w = grid.omega(j);
        if (w == 0.0) continue;
        im[static_cast<size_t>(j)] =
            -0.5 * kPi * spectral_density(b, std::abs(w)) * (w > 0.0 ? 1.0 : -1.0);
    }
    const std::vector<double> re = kramers_kronig_real(grid, im);
    Spectrum out(grid);
    for (int j = 0; j < grid.n_points(); ++j)
        out.values[static_cast<size_t>(j)] = {re[static_cast<size_t>(j)], im[static_cast<size_t>(j)]};
    out.meta.method = "im analytic, re grid Kramers-Kronig";
    out.meta.regulator_dominated_band = bath.family == BathFamily::sub_ohmic_minus;
    return out;
}

double nu_bath_freq(const BathSpec& bath, double omega, double t_f) {
    const double aw = std::abs(omega);
    if (bath.family == BathFamily::sub_ohmic_minus) require_ir_regular(bath, "nu_bath_freq");
    if (aw == 0.0) {
        if (t_f == 0.0) {
            // pi * J(|w|) -> 0 for the regular families
            if (bath.family == BathFamily::discrete) return 0.0;
            return 0.0;
        }
        // limit 2T pi J(w)/w
        switch (bath.family) {
            case BathFamily::ohmic_plus: return kPi * bath.lambda * bath.lambda * t_f;
            case BathFamily::sub_ohmic_minus:
                return kPi * bath.lambda * bath.lambda * t_f / (bath.omega_ir * bath.omega_ir);
            case BathFamily::discrete: return 0.0; // antisymmetrized surrogate ~ w at 0
        }
    }
    return kPi * density_times_coth(bath, aw, t_f);
}

Spectrum nu_bath_freq(const BathSpec& bath, const FreqGrid& grid, double t_f) {
    bath.validate();
    BathSpec b = bath;
    if (b.family == BathFamily::discrete && !(b.sigma_delta > 0.0))
        b.sigma_delta = 0.5 * grid.d_omega();
    Spectrum out(grid);
    for (int j = 0; j < grid.n_points(); ++j)
        out.values[static_cast<size_t>(j)] = {nu_bath_freq(b, grid.omega(j), t_f), 0.0};
    out.meta.method = "analytic";
    out.meta.regulator_dominated_band = bath.family == BathFamily::sub_ohmic_minus;
    return out;
}

FdrReport check_bath_fdr(const Spectrum& nu, const Spectrum& eta, double t_f, double omega_ir,
                         const std::string& identity) {
    require_same_grid(nu, eta, "check_bath_fdr");
    double nu_max = 0.0;
    for (const auto& v : nu.values) nu_max = std::max(nu_max, std::abs(v.real()));
    FdrReport rep;
    rep.identity = identity;
    double sum_sq = 0.0;
    for (int j = 0; j < nu.n_points(); ++j) {
        const double w = nu.grid.omega(j);
        if (std::abs(w) <= omega_ir) continue;
        const double lhs = nu.values[static_cast<size_t>(j)].real();
        const double rhs = -2.0 * coth_thermal(w, t_f) * eta.values[static_cast<size_t>(j)].imag();
        const double denom = std::max(std::abs(lhs), 1e-30 * std::max(nu_max, 1e-300));
        const double rel = std::abs(lhs - rhs) / denom;
        rep.max_rel = std::max(rep.max_rel, rel);
        sum_sq += rel * rel;
        ++rep.n_points;
    }
    rep.rms_rel = rep.n_points > 0 ? std::sqrt(sum_sq / rep.n_points) : 0.0;
    return rep;
}

FdrReport check_bath_fdr(const BathSpec& bath, const FreqGrid& grid, double t_f) {
    const Spectrum nu = nu_bath_freq(bath, grid, t_f);
    const Spectrum eta = eta_bath_freq(bath, grid);
    const double band = bath.family == BathFamily::sub_ohmic_minus ? bath.omega_ir : 0.0;
    return check_bath_fdr(nu, eta, t_f, band,
                          std::string("bath_fdr_") + to_string(bath.family));
}

} // namespace qbm
