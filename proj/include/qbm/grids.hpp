#pragma once
// Uniform time and frequency grids. Everything in the library lives on these:
// time kernels on TimeGrid nodes t_k = k*dt, spectra on symmetric FreqGrid
// nodes that contain omega = 0 exactly.

#include <cmath>
#include <vector>

#include "qbm/errors.hpp"

namespace qbm {

struct TimeGrid {
    double t_max{0.0};
    int n_steps{0}; // number of intervals; nodes are 0..n_steps inclusive

    TimeGrid() = default;
    TimeGrid(double t_max_, int n_steps_) : t_max(t_max_), n_steps(n_steps_) {
        if (!(t_max > 0.0)) throw ConfigError("TimeGrid: t_max must be positive");
        if (n_steps < 2) throw ConfigError("TimeGrid: n_steps must be at least 2");
    }

    double dt() const { return t_max / n_steps; }
    int n_points() const { return n_steps + 1; }
    double time(int k) const { return k * dt(); }

    std::vector<double> times() const {
        std::vector<double> t(static_cast<size_t>(n_points()));
        for (int k = 0; k < n_points(); ++k) t[static_cast<size_t>(k)] = time(k);
        return t;
    }

    bool operator==(const TimeGrid& o) const {
        return t_max == o.t_max && n_steps == o.n_steps;
    }
};

// Symmetric frequency grid omega_j = (j - n_freq/2) * d_omega, j = 0..n_freq.
// n_freq must be even so that omega = 0 is a node (exactly, by construction).
struct FreqGrid {
    double omega_max{0.0};
    int n_freq{0}; // number of intervals; nodes are 0..n_freq inclusive

    FreqGrid() = default;
    FreqGrid(double omega_max_, int n_freq_) : omega_max(omega_max_), n_freq(n_freq_) {
        if (!(omega_max > 0.0)) throw ConfigError("FreqGrid: omega_max must be positive");
        if (n_freq < 2) throw ConfigError("FreqGrid: n_freq must be at least 2");
        if (n_freq % 2 != 0) throw ConfigError("FreqGrid: n_freq must be even so the grid contains 0");
    }

    double d_omega() const { return 2.0 * omega_max / n_freq; }
    int n_points() const { return n_freq + 1; }
    int zero_index() const { return n_freq / 2; }
    double omega(int j) const { return (j - zero_index()) * d_omega(); }
    // index of the node closest to omega (caller checks range)
    int index_of(double w) const { return zero_index() + static_cast<int>(std::lround(w / d_omega())); }

    std::vector<double> omegas() const {
        std::vector<double> w(static_cast<size_t>(n_points()));
        for (int j = 0; j < n_points(); ++j) w[static_cast<size_t>(j)] = omega(j);
        return w;
    }

    bool operator==(const FreqGrid& o) const {
        return omega_max == o.omega_max && n_freq == o.n_freq;
    }
};

} // namespace qbm
