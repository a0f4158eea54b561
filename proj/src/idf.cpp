#include "qbm/idf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qbm/fourier.hpp"
#include "qbm/volterra.hpp"

namespace qbm {
namespace {

void check_kernel_grid(const Kernel1D& k, const TimeGrid& grid, const char* where) {
    const double rel = std::abs(k.grid.dt() - grid.dt()) / grid.dt();
    if (rel > 1e-12)
        throw NumericsError(std::string(where) + ": kernel grid spacing does not match");
    if (k.n_points() < grid.n_points())
        throw NumericsError(std::string(where) + ": kernel does not cover the grid");
}

void check_cutoff_step(const BathSpec& bath, const TimeGrid& grid, const char* where) {
    if (bath.lambda == 0.0) return;
    const double dt = grid.dt();
    if (bath.family != BathFamily::discrete && dt * bath.cutoff > 1.0) {
        std::ostringstream msg;
        msg << where << ": dt = " << dt << " under-resolves the bath cutoff " << bath.cutoff
            << "; use dt <= " << 0.5 / bath.cutoff;
        throw NumericsError(msg.str());
    }
}

} // namespace

std::complex<double> green_freq(const OscillatorSpec& osc, const BathSpec& bath_minus,
                                double omega) {
    osc.validate();
    const std::complex<double> eta =
        bath_minus.lambda == 0.0 ? std::complex<double>(0.0, 0.0) : eta_bath_freq(bath_minus, omega);
    const std::complex<double> den =
        osc.mass * (osc.frequency * osc.frequency - omega * omega) + 2.0 * eta;
    const double scale = osc.mass * osc.frequency * osc.frequency;
    if (std::abs(den) < 1e-12 * scale) {
        std::ostringstream msg;
        msg << "green_freq: pole at omega = " << omega
            << " (undamped oscillator); a nonzero minus-channel coupling is required";
        throw NumericsError(msg.str());
    }
    return 1.0 / den;
}

Spectrum green_freq(const OscillatorSpec& osc, const BathSpec& bath_minus, const FreqGrid& grid) {
    osc.validate();
    Spectrum eta(grid);
    if (bath_minus.lambda != 0.0) eta = eta_bath_freq(bath_minus, grid);
    Spectrum out(grid);
    const double scale = osc.mass * osc.frequency * osc.frequency;
    for (int j = 0; j < grid.n_points(); ++j) {
        const double w = grid.omega(j);
        const std::complex<double> den =
            osc.mass * (osc.frequency * osc.frequency - w * w) + 2.0 * eta.at(j);
        if (std::abs(den) < 1e-12 * scale) {
            std::ostringstream msg;
            msg << "green_freq: pole on the grid at omega = " << w
                << "; a nonzero minus-channel coupling is required";
            throw NumericsError(msg.str());
        }
        out.values[static_cast<size_t>(j)] = 1.0 / den;
    }
    out.meta = eta.meta;
    return out;
}

double renormalized_frequency(const OscillatorSpec& osc, const BathSpec& bath_minus,
                              double omega) {
    osc.validate();
    const double w0 = osc.frequency;
    const double re_eta =
        bath_minus.lambda == 0.0 ? 0.0 : eta_bath_freq(bath_minus, omega).real();
    const double wr2 = w0 * w0 + 2.0 * re_eta / osc.mass;
    if (!(wr2 > 0.0)) {
        std::ostringstream msg;
        msg << "renormalized_frequency: w_R^2(" << omega << ") = " << wr2
            << " <= 0; the coupling overwhelms the bare stiffness (for the "
               "regularized sub-ohmic family the static shift is about "
               "lambda^2 pi / (2 omega_ir); raise omega_ir or lower lambda)";
        throw NumericsError(msg.str());
    }
    return std::sqrt(wr2);
}

double renormalized_frequency(const OscillatorSpec& osc, const BathSpec& bath_minus) {
    return renormalized_frequency(osc, bath_minus, osc.frequency);
}

DressedPropagator green_time(const OscillatorSpec& osc, const BathSpec& bath_minus,
                             const TimeGrid& grid, const FreqGrid* freq_grid) {
    osc.validate();
    bath_minus.validate();
    check_cutoff_step(bath_minus, grid, "green_time");
    const Kernel1D eta = eta_bath_kernel(bath_minus, grid);
    auto r = solve_oscillator_stationary(osc.mass, osc.frequency, eta.values, grid, 0.0,
                                         1.0 / osc.mass);
    DressedPropagator d;
    d.osc = osc;
    d.grid = grid;
    d.g = std::move(r.x);
    if (bath_minus.lambda != 0.0) {
        d.poles.omega_r = renormalized_frequency(osc, bath_minus);
        const double im_eta = eta_bath_freq(bath_minus, d.poles.omega_r).imag();
        d.poles.decay_rate = -im_eta / (osc.mass * d.poles.omega_r);
        if (freq_grid) d.g_bar = green_freq(osc, bath_minus, *freq_grid);
    } else {
        d.poles.omega_r = osc.frequency;
        d.poles.decay_rate = 0.0;
    }
    return d;
}

std::pair<Kernel1D, Kernel1D> homogeneous_basis(const OscillatorSpec& osc,
                                                const BathSpec& bath_minus, const TimeGrid& grid) {
    osc.validate();
    bath_minus.validate();
    check_cutoff_step(bath_minus, grid, "homogeneous_basis");
    const Kernel1D eta = eta_bath_kernel(bath_minus, grid);
    auto ru = solve_oscillator_stationary(osc.mass, osc.frequency, eta.values, grid, 1.0, 0.0);
    auto rv = solve_oscillator_stationary(osc.mass, osc.frequency, eta.values, grid, 0.0, 1.0);
    Kernel1D u(grid, Support::causal);
    Kernel1D v(grid, Support::causal);
    u.values = std::move(ru.x);
    v.values = std::move(rv.x);
    return {u, v};
}

WignerMoments initial_moments(const OscillatorSpec& osc, double t_i) {
    osc.validate();
    if (t_i < 0.0) throw ConfigError("initial_moments: negative temperature");
    const double c = t_i == 0.0 ? 1.0 : 1.0 / std::tanh(0.5 * osc.frequency / t_i);
    WignerMoments m;
    m.sigma_qq = c / (2.0 * osc.mass * osc.frequency);
    m.sigma_pp = 0.5 * osc.mass * osc.frequency * c;
    return m;
}

Kernel2D initial_correlator(const OscillatorSpec& osc, double t_i, const Kernel1D& u,
                            const Kernel1D& v) {
    if (!(u.grid == v.grid)) throw NumericsError("initial_correlator: u and v grids differ");
    check_dense_budget(u.grid, "initial_correlator");
    const WignerMoments m = initial_moments(osc, t_i);
    const int np = u.grid.n_points();
    Eigen::Map<const Eigen::VectorXd> uv(u.values.data(), np);
    Eigen::Map<const Eigen::VectorXd> vv(v.values.data(), np);
    Kernel2D out(u.grid, Symmetry2D::symmetric);
    out.values = m.sigma_qq * (uv * uv.transpose()) +
                 (m.sigma_pp / (osc.mass * osc.mass)) * (vv * vv.transpose());
    return out;
}

Kernel2D nu_gg_finite(const Kernel1D& g, const Kernel1D& nu_minus, const TimeGrid& grid) {
    check_dense_budget(grid, "nu_gg_finite");
    check_kernel_grid(g, grid, "nu_gg_finite(g)");
    check_kernel_grid(nu_minus, grid, "nu_gg_finite(nu_minus)");
    const int np = grid.n_points();
    const double dt = grid.dt();

    // A(i,k) = dt * w_k G(t_i - t_k) for k <= i (trapezoid weights on [0,t_i])
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(np, np);
    for (int i = 1; i < np; ++i) {
        for (int k = 0; k <= i; ++k) {
            double w = (k == 0 || k == i) ? 0.5 : 1.0;
            a(i, k) = dt * w * g.values[static_cast<size_t>(i - k)];
        }
    }
    Eigen::MatrixXd n(np, np);
    for (int k = 0; k < np; ++k)
        for (int l = 0; l < np; ++l) n(k, l) = nu_minus.values[static_cast<size_t>(std::abs(k - l))];

    Kernel2D out(grid, Symmetry2D::symmetric);
    out.values.noalias() = a * n * a.transpose();
    out.values = 0.5 * (out.values + out.values.transpose()).eval();
    return out;
}

std::vector<double> nu_gg_stationary(const std::vector<double>& g, double dt, int i_ref,
                                     int n_window, const std::vector<double>& nu_minus_lags) {
    const int need = i_ref + n_window + 1;
    if (static_cast<int>(g.size()) < need)
        throw NumericsError("nu_gg_stationary: propagator array too short for the window");
    if (static_cast<int>(nu_minus_lags.size()) < need)
        throw NumericsError("nu_gg_stationary: noise kernel array too short for the window");

    // c[k] = dt * sum_{l'=0}^{i_ref} w_l' G(l') nu_minus(k - i_ref + l'),
    // k = 0..i_ref+n_window: correlation of the weighted propagator segment
    // with the two-sided noise kernel
    std::vector<double> wg(static_cast<size_t>(i_ref + 1));
    for (int l = 0; l <= i_ref; ++l) wg[static_cast<size_t>(l)] = g[static_cast<size_t>(l)];
    wg.front() *= 0.5;
    wg.back() *= 0.5;
    const int n_c = i_ref + n_window + 1;
    std::vector<double> nu_shift(static_cast<size_t>(i_ref + n_c)); // lag -i_ref..n_c-1
    for (int m = 0; m < i_ref + n_c; ++m)
        nu_shift[static_cast<size_t>(m)] = nu_minus_lags[static_cast<size_t>(std::abs(m - i_ref))];
    std::vector<double> c_full = linear_correlation(wg, nu_shift);
    std::vector<double> c(c_full.begin(), c_full.begin() + n_c);
    for (auto& x : c) x *= dt;

    // s(i1) = dt * sum_{k'=0}^{i1} w_k' G(k') c(i1 - k'), i1 = i_ref..i_ref+n_window
    std::vector<double> wg2(g.begin(), g.begin() + n_c);
    wg2.front() *= 0.5;
    std::vector<double> s_full = linear_convolution(wg2, c);
    std::vector<double> out(static_cast<size_t>(n_window + 1));
    for (int j = 0; j <= n_window; ++j) {
        const int i1 = i_ref + j;
        // subtract half of the k' = i1 endpoint term (entered with weight 1)
        const double s = s_full[static_cast<size_t>(i1)] - 0.5 * g[static_cast<size_t>(i1)] * c[0];
        out[static_cast<size_t>(j)] = dt * s;
    }
    return out;
}

NuGGFreq nu_gg_freq(const Spectrum& g_bar, const Spectrum& nu_minus_bar, double t_f) {
    require_same_grid(g_bar, nu_minus_bar, "nu_gg_freq");
    NuGGFreq out;
    out.primary = Spectrum(g_bar.grid);
    out.via_fdr = Spectrum(g_bar.grid);
    const int z = g_bar.grid.zero_index();
    double max_abs = 0.0;
    for (int j = 0; j < g_bar.n_points(); ++j) {
        const double w = g_bar.grid.omega(j);
        const double g2 = std::norm(g_bar.at(j));
        out.primary.values[static_cast<size_t>(j)] = {g2 * nu_minus_bar.at(j).real(), 0.0};
        if (j != z)
            out.via_fdr.values[static_cast<size_t>(j)] = {
                coth_thermal(w, t_f) * g_bar.at(j).imag(), 0.0};
        max_abs = std::max(max_abs, std::abs(out.primary.values[static_cast<size_t>(j)].real()));
    }
    // coth(w/2T) Im G -> 2T (Im G)'(0) as w -> 0; centered difference
    if (t_f > 0.0 && g_bar.grid.n_freq >= 2) {
        const double slope = (g_bar.at(z + 1).imag() - g_bar.at(z - 1).imag()) /
                             (2.0 * g_bar.grid.d_omega());
        out.via_fdr.values[static_cast<size_t>(z)] = {2.0 * t_f * slope, 0.0};
    }
    for (int j = 0; j < g_bar.n_points(); ++j) {
        if (j == z) continue; // limit node carries finite-difference error
        const double d = std::abs(out.primary.at(j).real() - out.via_fdr.at(j).real());
        if (max_abs > 0.0) out.max_rel_residual = std::max(out.max_rel_residual, d / max_abs);
    }
    return out;
}

} // namespace qbm
