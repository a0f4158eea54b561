#pragma once
// Complex spectra on a FreqGrid. Convention: F(omega) = \int dt e^{+i omega t} F(t),
// inverse F(t) = \int domega/(2 pi) e^{-i omega t} F(omega), and convolution
// [A * B](omega) = \int domega'/(2 pi) A(omega - omega') B(omega').

#include <complex>
#include <string>
#include <vector>

#include "qbm/errors.hpp"
#include "qbm/grids.hpp"

namespace qbm {

inline constexpr const char* kFourierConvention = "F(w)=int dt e^{+iwt} f(t); conv=int dw'/2pi";

struct SpectrumMeta {
    std::string window = "none"; // taper applied before transforming
    std::string method = "";     // "fft(N)" or "direct"
    bool regulator_dominated_band = false; // |omega| < omega_ir values dominated by the IR regulator
};

struct Spectrum {
    FreqGrid grid;
    std::vector<std::complex<double>> values; // values[j] at grid.omega(j)
    std::string convention = kFourierConvention;
    SpectrumMeta meta;

    Spectrum() = default;
    explicit Spectrum(const FreqGrid& g)
        : grid(g), values(static_cast<size_t>(g.n_points()), {0.0, 0.0}) {}

    int n_points() const { return grid.n_points(); }
    std::complex<double> at(int j) const { return values[static_cast<size_t>(j)]; }

    // linear interpolation at arbitrary omega inside the grid; zero outside
    std::complex<double> interp(double w) const {
        const double dw = grid.d_omega();
        const double x = w / dw + grid.zero_index();
        if (x <= 0.0 || x >= grid.n_freq) {
            if (x == 0.0) return values.front();
            if (x == static_cast<double>(grid.n_freq)) return values.back();
            return {0.0, 0.0};
        }
        const int j = static_cast<int>(x);
        const double f = x - j;
        return (1.0 - f) * values[static_cast<size_t>(j)] + f * values[static_cast<size_t>(j + 1)];
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

inline void require_same_grid(const Spectrum& a, const Spectrum& b, const char* where) {
    if (!(a.grid == b.grid))
        throw NumericsError(std::string(where) + ": spectra live on different frequency grids");
}

} // namespace qbm
