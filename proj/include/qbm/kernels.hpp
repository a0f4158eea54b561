#pragma once
// Kernel containers. Kernel1D stores a stationary kernel sampled at
// non-negative lags tau_k = k*dt together with a support tag that fixes the
// implied extension to negative lags. Kernel2D stores a dense two-time kernel
// K(t_i, t_j) on a TimeGrid.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qbm/errors.hpp"
#include "qbm/grids.hpp"

namespace qbm {

enum class Support {
    causal, // K(tau) = 0 for tau < 0
    even,   // K(-tau) = K(tau)
    odd     // K(-tau) = -K(tau)
};

inline const char* to_string(Support s) {
    switch (s) {
        case Support::causal: return "causal";
        case Support::even: return "even";
        case Support::odd: return "odd";
    }
    return "?";
}

struct Kernel1D {
    TimeGrid grid;               // lags covered: [0, grid.t_max]
    Support support{Support::causal};
    std::vector<double> values;  // values[k] = K(tau_k), k = 0..n_steps

    Kernel1D() = default;
    Kernel1D(const TimeGrid& g, Support s)
        : grid(g), support(s), values(static_cast<size_t>(g.n_points()), 0.0) {}

    int n_points() const { return grid.n_points(); }

    // value at signed lag index k (k may be negative); resolves via the tag
    double at_lag(int k) const {
        const int a = k < 0 ? -k : k;
        if (a >= n_points()) throw NumericsError("Kernel1D: lag index out of range");
        const double v = values[static_cast<size_t>(a)];
        if (k >= 0) return v;
        switch (support) {
            case Support::causal: return 0.0;
            case Support::even: return v;
            case Support::odd: return -v;
        }
        return 0.0;
    }
};

enum class Symmetry2D {
    symmetric,    // K(t1,t2) = K(t2,t1)
    causal_lower, // K(t1,t2) = 0 for t1 < t2 (lower-triangular)
    general
};

inline const char* to_string(Symmetry2D s) {
    switch (s) {
        case Symmetry2D::symmetric: return "symmetric";
        case Symmetry2D::causal_lower: return "causal_lower";
        case Symmetry2D::general: return "general";
    }
    return "?";
}

struct Kernel2D {
    TimeGrid grid;
    Symmetry2D symmetry{Symmetry2D::general};
    Eigen::MatrixXd values; // values(i,j) = K(t_i, t_j)

    Kernel2D() = default;
    Kernel2D(const TimeGrid& g, Symmetry2D s)
        : grid(g), symmetry(s), values(Eigen::MatrixXd::Zero(g.n_points(), g.n_points())) {}

    int n_points() const { return grid.n_points(); }
    double max_abs() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }

    // largest |K(i,j) - K(j,i)| relative to max |K|
    double asymmetry() const {
        const double m = max_abs();
        if (m == 0.0) return 0.0;
        return (values - values.transpose()).cwiseAbs().maxCoeff() / m;
    }
};

// Dense two-time kernels are memory-bound; refuse grids beyond this many steps
// (4096 steps -> ~134 MB per kernel matrix).
inline constexpr int kMaxDenseSteps = 4096;

inline void check_dense_budget(const TimeGrid& g, const char* where) {
    if (g.n_steps > kMaxDenseSteps)
        throw NumericsError(std::string(where) + ": n_steps = " + std::to_string(g.n_steps) +
                            " exceeds the dense two-time kernel budget (max n_steps = " +
                            std::to_string(kMaxDenseSteps) + ")");
}

} // namespace qbm
