#include "qbm/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

namespace qbm {
namespace {

constexpr double kPi = std::numbers::pi;

// FFTW's planner is not thread-safe; executes on distinct buffers are.
std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

struct FftBuffer {
    fftw_complex* data{nullptr};
    explicit FftBuffer(size_t n) {
        data = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        if (!data) throw NumericsError("fftw_malloc failed");
    }
    ~FftBuffer() { fftw_free(data); }
    FftBuffer(const FftBuffer&) = delete;
    FftBuffer& operator=(const FftBuffer&) = delete;
    std::complex<double>* c() { return reinterpret_cast<std::complex<double>*>(data); }
};

void fft_inplace(FftBuffer& buf, long n, int sign) {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(n), buf.data, buf.data, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(plan);
    }
}

long next_pow2(long n) {
    long p = 1;
    while (p < n) p <<= 1;
    return p;
}

// 4th-order one-sided derivative from the first five samples (h > 0 forward;
// pass h < 0 with the last five samples reversed for a backward stencil)
double one_sided_deriv(const double* g, double h) {
    return (-25.0 * g[0] + 48.0 * g[1] - 36.0 * g[2] + 16.0 * g[3] - 3.0 * g[4]) / (12.0 * h);
}

struct SampledKernel {
    std::vector<double> g; // samples on t_m = m*dt, m = m_lo..m_hi (index m - m_lo)
    int m_lo{0};
    int m_hi{0};
    double dt{0.0};
    // endpoint data for the Euler-Maclaurin correction
    double g_lo{0.0}, g_hi{0.0}, dg_lo{0.0}, dg_hi{0.0};
};

SampledKernel materialize(const Kernel1D& kernel, Window window) {
    const int n = kernel.grid.n_steps;
    const double dt = kernel.grid.dt();
    SampledKernel s;
    s.dt = dt;
    const bool two_sided = kernel.support != Support::causal;
    s.m_lo = two_sided ? -n : 0;
    s.m_hi = n;
    s.g.resize(static_cast<size_t>(s.m_hi - s.m_lo + 1));
    for (int m = s.m_lo; m <= s.m_hi; ++m)
        s.g[static_cast<size_t>(m - s.m_lo)] = kernel.at_lag(m);
    if (window == Window::hann) {
        for (int m = s.m_lo; m <= s.m_hi; ++m) {
            const double c = std::cos(0.5 * kPi * std::abs(m) / n);
            s.g[static_cast<size_t>(m - s.m_lo)] *= c * c;
        }
    }
    const size_t len = s.g.size();
    if (len < 5) throw NumericsError("fourier_of_kernel: kernel too short for end corrections");
    s.g_lo = s.g.front();
    s.g_hi = s.g.back();
    s.dg_lo = one_sided_deriv(s.g.data(), dt);
    double rev[5];
    for (int i = 0; i < 5; ++i) rev[i] = s.g[len - 1 - static_cast<size_t>(i)];
    s.dg_hi = one_sided_deriv(rev, -dt);
    return s;
}

std::complex<double> end_correction(const SampledKernel& s, double w) {
    // trapezoid error: -dt^2/12 * [phi'(b) - phi'(a)], phi = g(t) e^{iwt}
    const std::complex<double> i1(0.0, 1.0);
    const double a = s.m_lo * s.dt;
    const double b = s.m_hi * s.dt;
    const std::complex<double> phia = (s.dg_lo + i1 * w * s.g_lo) * std::exp(i1 * w * a);
    const std::complex<double> phib = (s.dg_hi + i1 * w * s.g_hi) * std::exp(i1 * w * b);
    return -(s.dt * s.dt / 12.0) * (phib - phia);
}

} // namespace

Spectrum fourier_of_kernel(const Kernel1D& kernel, const FreqGrid& grid, Window window) {
    const double dt = kernel.grid.dt();
    const double nyquist = kPi / dt;
    if (grid.omega_max > nyquist * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "fourier_of_kernel: omega_max = " << grid.omega_max
            << " exceeds the Nyquist limit pi/dt = " << nyquist;
        throw NumericsError(msg.str());
    }
    SampledKernel s = materialize(kernel, window);
    Spectrum out(grid);
    out.meta.window = (window == Window::hann) ? "hann" : "none";

    const int np = grid.n_points();
    const int z = grid.zero_index();
    const double dw = grid.d_omega();
    const std::complex<double> i1(0.0, 1.0);

    // trapezoid endpoint halving
    std::vector<double> gw = s.g;
    gw.front() *= 0.5;
    gw.back() *= 0.5;

    // FFT path when the grid spacing matches a DFT bin width for some N
    const double x = 2.0 * kPi / (dw * dt);
    const long n_fft = std::lround(x);
    const bool commensurate = std::abs(x - static_cast<double>(n_fft)) < 1e-6 * x;
    const long span = s.m_hi - s.m_lo + 1;
    const long max_bin = std::max(std::abs(z - 0), std::abs(np - 1 - z));
    const bool fft_ok = commensurate && n_fft >= span && max_bin <= n_fft / 2 && n_fft <= (1L << 26);

    if (fft_ok) {
        FftBuffer buf(static_cast<size_t>(n_fft));
        std::fill(buf.c(), buf.c() + n_fft, std::complex<double>(0.0, 0.0));
        for (int m = s.m_lo; m <= s.m_hi; ++m) {
            const long idx = ((m % n_fft) + n_fft) % n_fft;
            buf.c()[idx] += gw[static_cast<size_t>(m - s.m_lo)];
        }
        fft_inplace(buf, n_fft, FFTW_BACKWARD); // sign +i matches e^{+i w t}
        for (int j = 0; j < np; ++j) {
            const long b = (((j - z) % n_fft) + n_fft) % n_fft;
            out.values[static_cast<size_t>(j)] = dt * buf.c()[b] + end_correction(s, grid.omega(j));
        }
        out.meta.method = "fft(" + std::to_string(n_fft) + ")";
    } else {
        // direct: recurrence in e^{i w dt} per frequency
        for (int j = 0; j < np; ++j) {
            const double w = grid.omega(j);
            const std::complex<double> r = std::exp(i1 * w * dt);
            std::complex<double> p(1.0, 0.0);
            std::complex<double> acc = gw[static_cast<size_t>(-s.m_lo)]; // m = 0 term
            for (int m = 1; m <= s.m_hi; ++m) {
                p *= r;
                if ((m & 1023) == 0) p /= std::abs(p);
                acc += gw[static_cast<size_t>(m - s.m_lo)] * p;
                if (-m >= s.m_lo) acc += gw[static_cast<size_t>(-m - s.m_lo)] * std::conj(p);
            }
            out.values[static_cast<size_t>(j)] = dt * acc + end_correction(s, w);
        }
        out.meta.method = "direct";
    }

    // exact parity of the analytic transform: even -> real, odd -> imaginary
    if (kernel.support == Support::even)
        for (auto& v : out.values) v = std::complex<double>(v.real(), 0.0);
    if (kernel.support == Support::odd)
        for (auto& v : out.values) v = std::complex<double>(0.0, v.imag());
    return out;
}

std::vector<std::complex<double>> inverse_fourier(const Spectrum& spectrum,
                                                  const std::vector<double>& times) {
    const int np = spectrum.n_points();
    const double dw = spectrum.grid.d_omega();
    const double w0 = spectrum.grid.omega(0);
    const std::complex<double> i1(0.0, 1.0);
    std::vector<std::complex<double>> vals = spectrum.values;
    vals.front() *= 0.5;
    vals.back() *= 0.5;
    std::vector<std::complex<double>> out(times.size());
    for (size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        const std::complex<double> r = std::exp(-i1 * dw * t);
        std::complex<double> p = std::exp(-i1 * w0 * t);
        std::complex<double> acc(0.0, 0.0);
        for (int j = 0; j < np; ++j) {
            acc += vals[static_cast<size_t>(j)] * p;
            p *= r;
            if ((j & 1023) == 1023) p /= std::abs(p);
        }
        out[k] = acc * (dw / (2.0 * kPi));
    }
    return out;
}

Spectrum freq_convolution(const Spectrum& a, const Spectrum& b) {
    require_same_grid(a, b, "freq_convolution");
    const int np = a.n_points();
    const int z = a.grid.zero_index();
    const double scale = a.grid.d_omega() / (2.0 * kPi);
    std::vector<std::complex<double>> bw = b.values;
    bw.front() *= 0.5;
    bw.back() *= 0.5;
    Spectrum out(a.grid);
    if (np <= 2049) {
        for (int i = 0; i < np; ++i) {
            std::complex<double> acc(0.0, 0.0);
            // A index i-j+z must lie in [0, np)
            const int j_lo = std::max(0, i + z - (np - 1));
            const int j_hi = std::min(np - 1, i + z);
            for (int j = j_lo; j <= j_hi; ++j)
                acc += a.values[static_cast<size_t>(i - j + z)] * bw[static_cast<size_t>(j)];
            out.values[static_cast<size_t>(i)] = scale * acc;
        }
        out.meta.method = "direct";
    } else {
        const long m = next_pow2(2L * np);
        FftBuffer fa(static_cast<size_t>(m)), fb(static_cast<size_t>(m));
        std::fill(fa.c(), fa.c() + m, std::complex<double>(0.0, 0.0));
        std::fill(fb.c(), fb.c() + m, std::complex<double>(0.0, 0.0));
        std::copy(a.values.begin(), a.values.end(), fa.c());
        std::copy(bw.begin(), bw.end(), fb.c());
        fft_inplace(fa, m, FFTW_FORWARD);
        fft_inplace(fb, m, FFTW_FORWARD);
        for (long k = 0; k < m; ++k) fa.c()[k] *= fb.c()[k] / static_cast<double>(m);
        fft_inplace(fa, m, FFTW_BACKWARD);
        for (int i = 0; i < np; ++i) out.values[static_cast<size_t>(i)] = scale * fa.c()[i + z];
        out.meta.method = "fft(" + std::to_string(m) + ")";
    }
    return out;
}

double spectrum_tail_fraction(const Spectrum& s, double fraction) {
    const int np = s.n_points();
    const int k = std::max(1, static_cast<int>(fraction * np));
    double tail = 0.0;
    for (int j = 0; j < k; ++j) {
        tail = std::max(tail, std::abs(s.values[static_cast<size_t>(j)]));
        tail = std::max(tail, std::abs(s.values[static_cast<size_t>(np - 1 - j)]));
    }
    const double m = s.max_abs();
    return m > 0.0 ? tail / m : 0.0;
}

std::vector<double> kramers_kronig_real(const FreqGrid& grid, const std::vector<double>& im_values) {
    const int np = grid.n_points();
    if (static_cast<int>(im_values.size()) != np)
        throw NumericsError("kramers_kronig_real: value count does not match the grid");
    const double dw = grid.d_omega();
    const double W = grid.omega_max;
    const int n = np - 1;

    // T_i = sum_{j != i} Im_j / ((j - i) dw) by circular FFT convolution
    const long m = next_pow2(2L * np);
    FftBuffer fa(static_cast<size_t>(m)), fh(static_cast<size_t>(m));
    std::fill(fa.c(), fa.c() + m, std::complex<double>(0.0, 0.0));
    std::fill(fh.c(), fh.c() + m, std::complex<double>(0.0, 0.0));
    for (int j = 0; j < np; ++j) fa.c()[j] = im_values[static_cast<size_t>(j)];
    for (long k = 1; k < m / 2; ++k) {
        fh.c()[k] = 1.0 / (static_cast<double>(k) * dw);
        fh.c()[m - k] = -1.0 / (static_cast<double>(k) * dw);
    }
    fft_inplace(fa, m, FFTW_FORWARD);
    fft_inplace(fh, m, FFTW_FORWARD);
    for (long k = 0; k < m; ++k) fa.c()[k] *= fh.c()[k] / static_cast<double>(m);
    fft_inplace(fa, m, FFTW_BACKWARD);
    // circular conv (A * H)_i = sum_j A_j h_{i-j}; we need sum_j A_j h_{j-i} = -(A * H)_i
    std::vector<double> T(static_cast<size_t>(np));
    for (int i = 0; i < np; ++i) T[static_cast<size_t>(i)] = -fa.c()[i].real();

    // harmonic numbers for sum_{j != i} 1/(j - i)
    std::vector<double> harm(static_cast<size_t>(np), 0.0);
    for (int k = 1; k < np; ++k)
        harm[static_cast<size_t>(k)] = harm[static_cast<size_t>(k - 1)] + 1.0 / k;

    auto deriv = [&](int i) {
        const auto& v = im_values;
        if (i >= 2 && i <= n - 2)
            return (-v[static_cast<size_t>(i + 2)] + 8.0 * v[static_cast<size_t>(i + 1)] -
                    8.0 * v[static_cast<size_t>(i - 1)] + v[static_cast<size_t>(i - 2)]) /
                   (12.0 * dw);
        if (i >= 1 && i <= n - 1)
            return (v[static_cast<size_t>(i + 1)] - v[static_cast<size_t>(i - 1)]) / (2.0 * dw);
        if (i == 0) return (v[1] - v[0]) / dw;
        return (v[static_cast<size_t>(n)] - v[static_cast<size_t>(n - 1)]) / dw;
    };

    std::vector<double> re(static_cast<size_t>(np));
    for (int i = 0; i < np; ++i) {
        const double im_i = im_values[static_cast<size_t>(i)];
        const double wi = grid.omega(i);
        // trapezoid of the pole-subtracted integrand
        double sum = T[static_cast<size_t>(i)] -
                     im_i * (harm[static_cast<size_t>(n - i)] - harm[static_cast<size_t>(i)]) / dw +
                     deriv(i);
        auto q = [&](int j) {
            if (j == i) return deriv(i);
            return (im_values[static_cast<size_t>(j)] - im_i) / (grid.omega(j) - wi);
        };
        sum -= 0.5 * (q(0) + q(n));
        double window_log = 0.0;
        if (i > 0 && i < n) window_log = im_i * std::log((W - wi) / (W + wi));
        re[static_cast<size_t>(i)] = (dw * sum + window_log) / kPi;
    }
    return re;
}

std::vector<double> linear_convolution(const std::vector<double>& a, const std::vector<double>& b) {
    const long na = static_cast<long>(a.size());
    const long nb = static_cast<long>(b.size());
    if (na == 0 || nb == 0) return {};
    const long m = next_pow2(na + nb - 1);
    FftBuffer fa(static_cast<size_t>(m)), fb(static_cast<size_t>(m));
    std::fill(fa.c(), fa.c() + m, std::complex<double>(0.0, 0.0));
    std::fill(fb.c(), fb.c() + m, std::complex<double>(0.0, 0.0));
    for (long j = 0; j < na; ++j) fa.c()[j] = a[static_cast<size_t>(j)];
    for (long j = 0; j < nb; ++j) fb.c()[j] = b[static_cast<size_t>(j)];
    fft_inplace(fa, m, FFTW_FORWARD);
    fft_inplace(fb, m, FFTW_FORWARD);
    for (long k = 0; k < m; ++k) fa.c()[k] *= fb.c()[k] / static_cast<double>(m);
    fft_inplace(fa, m, FFTW_BACKWARD);
    std::vector<double> out(static_cast<size_t>(na + nb - 1));
    for (long k = 0; k < na + nb - 1; ++k) out[static_cast<size_t>(k)] = fa.c()[k].real();
    return out;
}

std::vector<double> linear_correlation(const std::vector<double>& y, const std::vector<double>& x) {
    const long ny = static_cast<long>(y.size());
    const long nx = static_cast<long>(x.size());
    if (ny == 0 || nx == 0) return {};
    const long m = next_pow2(nx + ny);
    FftBuffer fy(static_cast<size_t>(m)), fx(static_cast<size_t>(m));
    std::fill(fy.c(), fy.c() + m, std::complex<double>(0.0, 0.0));
    std::fill(fx.c(), fx.c() + m, std::complex<double>(0.0, 0.0));
    for (long j = 0; j < ny; ++j) fy.c()[j] = y[static_cast<size_t>(j)];
    for (long j = 0; j < nx; ++j) fx.c()[j] = x[static_cast<size_t>(j)];
    fft_inplace(fy, m, FFTW_FORWARD);
    fft_inplace(fx, m, FFTW_FORWARD);
    for (long k = 0; k < m; ++k) fx.c()[k] *= std::conj(fy.c()[k]) / static_cast<double>(m);
    fft_inplace(fx, m, FFTW_BACKWARD);
    std::vector<double> out(static_cast<size_t>(nx));
    for (long k = 0; k < nx; ++k) out[static_cast<size_t>(k)] = fx.c()[k].real();
    return out;
}

LagTransform lag_kernel_from_spectral(const std::function<double(double)>& f, double dt, int n_lags,
                                      long n_fft, double omega_sample_max) {
    if (n_lags > n_fft / 2)
        throw NumericsError("lag_kernel_from_spectral: n_lags exceeds n_fft/2 (lag aliasing)");
    const double dw = 2.0 * kPi / (static_cast<double>(n_fft) * dt);
    const long m_max = std::min(n_fft - 1, static_cast<long>(std::ceil(omega_sample_max / dw)));
    FftBuffer buf(static_cast<size_t>(n_fft));
    std::fill(buf.c(), buf.c() + n_fft, std::complex<double>(0.0, 0.0));
    std::vector<double> g3(3, 0.0);
    for (long mm = 0; mm <= m_max; ++mm) {
        const double v = f(static_cast<double>(mm) * dw);
        buf.c()[mm] = v;
        if (mm < 3) g3[static_cast<size_t>(mm)] = v;
    }
    const double g0 = g3[0];
    const double df0 = (-3.0 * g3[0] + 4.0 * g3[1] - g3[2]) / (2.0 * dw);
    fft_inplace(buf, n_fft, FFTW_BACKWARD);
    LagTransform out;
    out.cos_part.resize(static_cast<size_t>(n_lags));
    out.sin_part.resize(static_cast<size_t>(n_lags));
    const double em_cos = dw * dw / 12.0 * df0;
    for (int k = 0; k < n_lags; ++k) {
        const double tau = k * dt;
        out.cos_part[static_cast<size_t>(k)] = dw * (buf.c()[k].real() - 0.5 * g0) + em_cos;
        out.sin_part[static_cast<size_t>(k)] = dw * buf.c()[k].imag() + dw * dw / 12.0 * tau * g0;
    }
    return out;
}

} // namespace qbm
