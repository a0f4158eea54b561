#include "qbm/composite.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qbm/errors.hpp"
#include "qbm/fourier.hpp"

namespace qbm {

namespace {

void require_lag_inputs(const Kernel1D& eta_plus, const Kernel1D& nu_plus, const Kernel2D& nu_gg,
                        const Kernel2D* qh_corr, const Kernel1D& g, const char* where) {
    const TimeGrid& grid = nu_gg.grid;
    if (!(eta_plus.grid == grid) || !(nu_plus.grid == grid) || !(g.grid == grid))
        throw ConfigError(std::string(where) + ": lag kernels and nu_GG live on different time grids");
    if (qh_corr && !(qh_corr->grid == grid))
        throw ConfigError(std::string(where) + ": initial-state correlator grid mismatch");
    check_dense_budget(grid, where);
}

// combined internal-state weight nu_GG + QQ at a node pair
inline double state_weight(const Kernel2D& nu_gg, const Kernel2D* qh_corr, int i, int j) {
    double s = nu_gg.values(i, j);
    if (qh_corr) s += qh_corr->values(i, j);
    return s;
}

double edge_max(const Spectrum& s) {
    const int n = s.grid.n_freq;
    const int band = std::max(2, n / 20);
    double m = 0.0;
    for (int j = 0; j <= band; ++j) {
        m = std::max(m, std::abs(s.values[static_cast<std::size_t>(j)]));
        m = std::max(m, std::abs(s.values[static_cast<std::size_t>(n - j)]));
    }
    return m;
}

// power-law fit of the outer decay, |S| ~ w^-p, used to suggest a grid edge
double decay_power(const Spectrum& s) {
    const int n = s.grid.n_freq;
    const int inner = n - std::max(2, n / 10);
    const double v_edge = edge_max(s);
    const double v_in = std::max(std::abs(s.values[static_cast<std::size_t>(inner)]),
                                 std::abs(s.values[static_cast<std::size_t>(n - inner)]));
    const double w_edge = s.grid.omega_max;
    const double w_in = std::abs(s.grid.omega(inner));
    if (!(v_edge > 0.0) || !(v_in > v_edge) || !(w_in > 0.0) || w_in >= w_edge) return 2.0;
    return std::log(v_in / v_edge) / std::log(w_edge / w_in);
}

// largest |S| over the outer half of the grid, |s| >= omega_max/2
double far_half_max(const Spectrum& s) {
    const int n = s.grid.n_freq;
    const int z = s.grid.zero_index();
    double m = 0.0;
    for (int j = 0; j <= n; ++j)
        if (std::abs(j - z) >= z / 2) m = std::max(m, std::abs(s.values[static_cast<std::size_t>(j)]));
    return m;
}

// estimated integral of |S| beyond the grid edge, extrapolating the fitted
// power decay; a non-decaying edge gets charged a wide extent
double tail_l1(const Spectrum& s) {
    const double p = decay_power(s);
    const double extent = p > 1.2 ? s.grid.omega_max / (p - 1.0) : 20.0 * s.grid.omega_max;
    return edge_max(s) * extent;
}

// bound on the truncation error of [a * b] for outputs |omega| <= omega_max/2:
// a lost contribution pairs the tail mass of one factor with the far half of
// the other
double truncation_bound(const Spectrum& a, const Spectrum& b) {
    return (far_half_max(a) * tail_l1(b) + far_half_max(b) * tail_l1(a)) / (2.0 * M_PI);
}

void require_converged_convolution(const Spectrum& a, const Spectrum& b, double out_scale,
                                    double tail_tol, const char* name) {
    const double bound = truncation_bound(a, b);
    if (!(out_scale > 0.0) || bound <= tail_tol * out_scale) return;
    const Spectrum& limiting =
        far_half_max(a) * tail_l1(b) >= far_half_max(b) * tail_l1(a) ? b : a;
    const double p = std::max(0.5, decay_power(limiting));
    const double w_req =
        limiting.grid.omega_max * std::pow(bound / (tail_tol * out_scale), 1.0 / p);
    throw NumericsError("kernels_late_freq: convolution " + std::string(name) +
                        " under-truncated (error bound " + std::to_string(bound / out_scale) +
                        " relative, tolerance " + std::to_string(tail_tol) +
                        "); extend omega_max to about " + std::to_string(w_req));
}

Spectrum real_part_spectrum(const Spectrum& s) {
    Spectrum out = s;
    for (auto& v : out.values) v = std::complex<double>(v.real(), 0.0);
    return out;
}

Spectrum imag_part_spectrum(const Spectrum& s) {
    Spectrum out = s;
    for (auto& v : out.values) v = std::complex<double>(v.imag(), 0.0);
    return out;
}

// (max second difference)/8: bound on the linear-interpolation error of a
// tabulated spectrum, |f - interp| <= d_omega^2 |f''| / 8
double interp_curvature_bound(const Spectrum& s) {
    double m = 0.0;
    for (std::size_t j = 1; j + 1 < s.values.size(); ++j)
        m = std::max(m, std::abs(s.values[j + 1] - 2.0 * s.values[j] + s.values[j - 1]));
    return m / 8.0;
}

} // namespace

Kernel2D eta2_time(const Kernel1D& eta_plus, const Kernel1D& nu_plus, const Kernel2D& nu_gg,
                   const Kernel2D* qh_corr, const Kernel1D& g) {
    require_lag_inputs(eta_plus, nu_plus, nu_gg, qh_corr, g, "eta2_time");
    const int n = nu_gg.grid.n_points();
    Kernel2D out;
    out.grid = nu_gg.grid;
    out.symmetry = Symmetry2D::causal_lower;
    out.values = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) {
            const int lag = i - j;
            const double ep = eta_plus.values[static_cast<std::size_t>(lag)];
            const double np = nu_plus.values[static_cast<std::size_t>(lag)];
            const double gl = g.values[static_cast<std::size_t>(lag)];
            out.values(i, j) =
                0.5 * ep * state_weight(nu_gg, qh_corr, i, j) + 0.25 * np * gl;
        }
        // equal-time value: Theta(0) = 1/2, and eta_plus(0) = g(0) = 0 anyway
        out.values(i, i) = 0.5 * (0.5 * eta_plus.values[0] * state_weight(nu_gg, qh_corr, i, i) +
                                  0.25 * nu_plus.values[0] * g.values[0]);
    }
    return out;
}

Kernel2D nu2_time(const Kernel1D& eta_plus, const Kernel1D& nu_plus, const Kernel2D& nu_gg,
                  const Kernel2D* qh_corr, const Kernel1D& g) {
    require_lag_inputs(eta_plus, nu_plus, nu_gg, qh_corr, g, "nu2_time");
    const int n = nu_gg.grid.n_points();
    Kernel2D out;
    out.grid = nu_gg.grid;
    out.symmetry = Symmetry2D::symmetric;
    out.values = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int lag = std::abs(i - j);
            const double ep = eta_plus.values[static_cast<std::size_t>(lag)];
            const double np = nu_plus.values[static_cast<std::size_t>(lag)];
            const double gl = g.values[static_cast<std::size_t>(lag)];
            // eta_plus and g are both odd in the lag, so their product is even
            // and no sign bookkeeping is needed here
            out.values(i, j) =
                0.5 * np * state_weight(nu_gg, qh_corr, i, j) - 0.25 * ep * gl;
        }
    }
    const double asym = out.asymmetry(); // already relative to max |value|
    if (asym > 1e-8)
        throw NumericsError("nu2_time: assembled noise kernel asymmetric (relative asymmetry " +
                            std::to_string(asym) + "); check the nu_GG input");
    return out;
}

LateFreqKernels kernels_late_freq(const SpectralBundle& bundle, double tail_tol) {
    require_same_grid(bundle.g_bar, bundle.eta_plus_bar, "kernels_late_freq");
    require_same_grid(bundle.g_bar, bundle.nu_plus_bar, "kernels_late_freq");
    require_same_grid(bundle.g_bar, bundle.nu_gg_bar, "kernels_late_freq");

    const Spectrum im_g = imag_part_spectrum(bundle.g_bar);
    const Spectrum im_ep = imag_part_spectrum(bundle.eta_plus_bar);

    LateFreqKernels out;
    {
        Spectrum term1 = freq_convolution(bundle.nu_gg_bar, bundle.eta_plus_bar);
        Spectrum term2 = freq_convolution(bundle.g_bar, bundle.nu_plus_bar);
        out.eta2_bar = term1;
        for (std::size_t j = 0; j < term1.values.size(); ++j)
            out.eta2_bar.values[j] = 0.5 * term1.values[j] + 0.25 * term2.values[j];
        out.eta2_bar.meta.method = "late_freq_convolution";
        const double scale = out.eta2_bar.max_abs();
        require_converged_convolution(bundle.nu_gg_bar, bundle.eta_plus_bar, 2.0 * scale,
                                      tail_tol, "nu_GG * eta_plus");
        require_converged_convolution(bundle.g_bar, bundle.nu_plus_bar, 4.0 * scale, tail_tol,
                                      "G * nu_plus");
    }
    {
        Spectrum term1 = freq_convolution(bundle.nu_gg_bar, bundle.nu_plus_bar);
        Spectrum term2 = freq_convolution(im_g, im_ep);
        out.nu2_bar = term1;
        double max_re = 0.0, max_im = 0.0;
        for (std::size_t j = 0; j < term1.values.size(); ++j) {
            const std::complex<double> v = 0.5 * term1.values[j] + term2.values[j];
            out.nu2_bar.values[j] = v;
            max_re = std::max(max_re, std::abs(v.real()));
            max_im = std::max(max_im, std::abs(v.imag()));
        }
        if (max_re > 0.0 && max_im > 1e-8 * max_re)
            throw NumericsError("kernels_late_freq: noise spectrum not real (relative imaginary part " +
                                std::to_string(max_im / max_re) + ")");
        out.nu2_bar = real_part_spectrum(out.nu2_bar);
        out.nu2_bar.meta.method = "late_freq_convolution";
        require_converged_convolution(bundle.nu_gg_bar, bundle.nu_plus_bar, 2.0 * max_re,
                                      tail_tol, "nu_GG * nu_plus");
        require_converged_convolution(im_g, im_ep, max_re, tail_tol, "Im G * Im eta_plus");
    }
    return out;
}

std::pair<TwoFreqKernel, TwoFreqKernel> two_freq_kernels(const SpectralBundle& bundle,
                                                         const FreqGrid& row_grid,
                                                         const FreqGrid& col_grid) {
    require_same_grid(bundle.g_bar, bundle.eta_plus_bar, "two_freq_kernels");
    require_same_grid(bundle.g_bar, bundle.nu_plus_bar, "two_freq_kernels");
    require_same_grid(bundle.g_bar, bundle.nu_gg_bar, "two_freq_kernels");
    const long n_rows = row_grid.n_freq + 1;
    const long n_cols = col_grid.n_freq + 1;
    if (n_rows * n_cols > 16'000'000L)
        throw NumericsError("two_freq_kernels: requested grid pair needs " +
                            std::to_string(n_rows * n_cols) +
                            " entries per kernel; refuse above 16000000");

    TwoFreqKernel d2{row_grid, col_grid, TwoFreqKind::d2,
                     Eigen::MatrixXcd::Zero(n_rows, n_cols), 0.0};
    TwoFreqKernel n2{row_grid, col_grid, TwoFreqKind::n2,
                     Eigen::MatrixXcd::Zero(n_rows, n_cols), 0.0};

    for (long j = 0; j < n_cols; ++j) {
        const double wp = col_grid.omega(static_cast<int>(j));
        const std::complex<double> ep = bundle.eta_plus_bar.interp(wp);
        const std::complex<double> np = bundle.nu_plus_bar.interp(wp);
        const double im_ep = ep.imag();
        for (long i = 0; i < n_rows; ++i) {
            const double dw = row_grid.omega(static_cast<int>(i)) - wp;
            const std::complex<double> gg = bundle.nu_gg_bar.interp(dw);
            const std::complex<double> g = bundle.g_bar.interp(dw);
            d2.values(i, j) = 0.5 * gg * ep + 0.25 * g * np;
            n2.values(i, j) = 0.5 * gg.real() * np.real() + g.imag() * im_ep;
        }
    }

    const double e_gg = interp_curvature_bound(bundle.nu_gg_bar);
    const double e_g = interp_curvature_bound(bundle.g_bar);
    const double e_ep = interp_curvature_bound(bundle.eta_plus_bar);
    const double e_np = interp_curvature_bound(bundle.nu_plus_bar);
    const double m_gg = bundle.nu_gg_bar.max_abs();
    const double m_g = bundle.g_bar.max_abs();
    const double m_ep = bundle.eta_plus_bar.max_abs();
    const double m_np = bundle.nu_plus_bar.max_abs();
    d2.interp_error_bound = 0.5 * (e_gg * m_ep + m_gg * e_ep) + 0.25 * (e_g * m_np + m_g * e_np);
    n2.interp_error_bound = 0.5 * (e_gg * m_np + m_gg * e_np) + (e_g * m_ep + m_g * e_ep);
    return {std::move(d2), std::move(n2)};
}

Spectrum two_freq_marginal(const TwoFreqKernel& k) {
    Spectrum out;
    out.grid = k.row_grid;
    out.values.assign(static_cast<std::size_t>(k.row_grid.n_freq) + 1, {0.0, 0.0});
    out.meta.method = "two_freq_marginal";
    const double dw = k.col_grid.d_omega();
    const long n_cols = k.col_grid.n_freq + 1;
    for (long i = 0; i <= k.row_grid.n_freq; ++i) {
        std::complex<double> acc = 0.0;
        for (long j = 0; j < n_cols; ++j) {
            const double w = (j == 0 || j == n_cols - 1) ? 0.5 : 1.0;
            acc += w * k.values(i, j);
        }
        out.values[static_cast<std::size_t>(i)] = acc * dw / (2.0 * M_PI);
    }
    return out;
}

namespace {

inline double tanh_thermal(double w, double t) {
    if (t <= 0.0) return w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
    return std::tanh(0.5 * w / t);
}

// two-frequency integrands evaluated off-grid through the bundle
inline std::complex<double> d2_value(const SpectralBundle& b, double w, double wp) {
    return 0.5 * b.nu_gg_bar.interp(w - wp) * b.eta_plus_bar.interp(wp) +
           0.25 * b.g_bar.interp(w - wp) * b.nu_plus_bar.interp(wp);
}

inline double n2_value(const SpectralBundle& b, double w, double wp) {
    return 0.5 * b.nu_gg_bar.interp(w - wp).real() * b.nu_plus_bar.interp(wp).real() +
           b.g_bar.interp(w - wp).imag() * b.eta_plus_bar.interp(wp).imag();
}

} // namespace

GenFdrReport check_generalized_fdr(const TwoFreqKernel& d2, const TwoFreqKernel& n2, double t,
                                   const SpectralBundle* bundle) {
    if (!(d2.row_grid == n2.row_grid) || !(d2.col_grid == n2.col_grid))
        throw ConfigError("check_generalized_fdr: D2 and N2 tabulated on different grids");
    if (t < 0.0) throw ConfigError("check_generalized_fdr: negative temperature");

    GenFdrReport report;
    const double delta = std::max(d2.row_grid.d_omega(), d2.col_grid.d_omega());
    const double n2_scale = n2.values.cwiseAbs().maxCoeff();
    const double floor = 1e-6 * n2_scale;
    double sum_sq = 0.0;
    for (long i = 0; i <= d2.row_grid.n_freq; ++i) {
        const double w = d2.row_grid.omega(static_cast<int>(i));
        for (long j = 0; j <= d2.col_grid.n_freq; ++j) {
            const double arg = w - 2.0 * d2.col_grid.omega(static_cast<int>(j));
            if (std::abs(arg) < delta) continue;
            const double lhs = n2.values(i, j).real();
            const double rhs = 2.0 * coth_thermal(arg, t) * d2.values(i, j).imag();
            const double rel = std::abs(lhs - rhs) / std::max(std::abs(lhs), floor);
            report.max_rel = std::max(report.max_rel, rel);
            sum_sq += rel * rel;
            ++report.n_admissible;
        }
    }
    if (report.n_admissible > 0) report.rms_rel = std::sqrt(sum_sq / report.n_admissible);

    if (!bundle) return report;

    // reconstruct the stationary spectra from the two-frequency integrands via
    // w' = (w - u)/2 and compare against the direct convolution marginals
    const LateFreqKernels direct = kernels_late_freq(*bundle);
    const double w_lim = std::min(0.5 * bundle->g_bar.grid.omega_max, d2.row_grid.omega_max);
    std::vector<double> sample_w;
    const int n_samples = 33;
    for (int k = 0; k < n_samples; ++k)
        sample_w.push_back(-w_lim + 2.0 * w_lim * k / (n_samples - 1));

    const FreqGrid& bg = bundle->g_bar.grid;
    const double dwb = bg.d_omega();
    double num_eta = 0.0, den_eta = 0.0, num_nu = 0.0, den_nu = 0.0;
    for (const double w : sample_w) {
        double rec_eta = 0.0;
        double rec_nu = 0.0;
        for (int k = 0; k <= bg.n_freq; ++k) {
            const double u = bg.omega(k);
            const double trap = (k == 0 || k == bg.n_freq) ? 0.5 : 1.0;
            const double wp = 0.5 * (w - u);
            rec_eta += trap * 0.25 * tanh_thermal(u, t) * n2_value(*bundle, w, wp);
            if (k == bg.zero_index()) {
                // coth(u/2T) Im D2 -> N2/2 as u -> 0 by the pointwise identity
                rec_nu += trap * 0.5 * n2_value(*bundle, w, 0.5 * w);
            } else {
                rec_nu += trap * coth_thermal(u, t) * d2_value(*bundle, w, wp).imag();
            }
        }
        rec_eta *= dwb / (2.0 * M_PI);
        rec_nu *= dwb / (2.0 * M_PI);
        const double ref_eta = direct.eta2_bar.interp(w).imag();
        const double ref_nu = direct.nu2_bar.interp(w).real();
        num_eta += (rec_eta - ref_eta) * (rec_eta - ref_eta);
        den_eta += ref_eta * ref_eta;
        num_nu += (rec_nu - ref_nu) * (rec_nu - ref_nu);
        den_nu += ref_nu * ref_nu;
    }
    report.recon_im_eta2_l2 = den_eta > 0.0 ? std::sqrt(num_eta / den_eta) : 0.0;
    report.recon_nu2_l2 = den_nu > 0.0 ? std::sqrt(num_nu / den_nu) : 0.0;
    return report;
}

Spectrum im_eta2_compact(const Spectrum& g_bar, const Spectrum& eta_plus_bar, double t) {
    require_same_grid(g_bar, eta_plus_bar, "im_eta2_compact");
    if (!(t > 0.0)) throw ConfigError("im_eta2_compact: requires a positive temperature");
    const FreqGrid& grid = g_bar.grid;
    const int z = grid.zero_index();
    const double dw = grid.d_omega();

    // real spectra entering the two convolutions; the w = 0 node of coth * Im f
    // is replaced by its limit 2 T (Im f)'(0)
    Spectrum im_g = imag_part_spectrum(g_bar);
    Spectrum im_ep = imag_part_spectrum(eta_plus_bar);
    auto with_coth = [&](const Spectrum& f) {
        Spectrum out = f;
        for (int j = 0; j <= grid.n_freq; ++j) {
            if (j == z) {
                const double slope =
                    (f.values[static_cast<std::size_t>(z + 1)].real() -
                     f.values[static_cast<std::size_t>(z - 1)].real()) /
                    (2.0 * dw);
                out.values[static_cast<std::size_t>(j)] = 2.0 * t * slope;
            } else {
                out.values[static_cast<std::size_t>(j)] =
                    coth_thermal(grid.omega(j), t) * f.values[static_cast<std::size_t>(j)];
            }
        }
        return out;
    };

    Spectrum term1 = freq_convolution(with_coth(im_g), im_ep);
    Spectrum term2 = freq_convolution(im_g, with_coth(im_ep));
    Spectrum out = term1;
    out.meta.method = "compact_thermal_difference";
    for (std::size_t j = 0; j < out.values.size(); ++j) {
        const double v = 0.5 * (term1.values[j].real() - term2.values[j].real());
        out.values[j] = std::complex<double>(0.0, v);
    }
    return out;
}

std::complex<double> influence_action(const Kernel2D& eta2, const Kernel2D& nu2,
                                      const std::vector<double>& x, const std::vector<double>& xp) {
    if (!(eta2.grid == nu2.grid))
        throw ConfigError("influence_action: kernel grids differ");
    const int n = eta2.grid.n_points();
    if (static_cast<int>(x.size()) != n || static_cast<int>(xp.size()) != n)
        throw ConfigError("influence_action: path length does not match the kernel grid");
    const double dt = eta2.grid.dt();

    Eigen::VectorXd xd(n), xs(n);
    for (int i = 0; i < n; ++i) {
        xd(i) = x[static_cast<std::size_t>(i)] - xp[static_cast<std::size_t>(i)];
        xs(i) = 0.5 * (x[static_cast<std::size_t>(i)] + xp[static_cast<std::size_t>(i)]);
    }
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    w(0) = 0.5;
    w(n - 1) = 0.5;
    const Eigen::VectorXd wxd = w.cwiseProduct(xd);
    const double real_part = 2.0 * dt * dt * wxd.dot(eta2.values * w.cwiseProduct(xs));
    const double imag_part = dt * dt * wxd.dot(nu2.values * wxd);
    return {real_part, imag_part};
}

} // namespace qbm
