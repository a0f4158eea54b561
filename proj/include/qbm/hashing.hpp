#pragma once
// FNV-1a content hashing for kernels and output files; used to build
// reproducible noise substreams and to stamp manifests.

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbm/kernels.hpp"
#include "qbm/spectrum.hpp"

namespace qbm {

inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = kFnvOffset) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = kFnvOffset) {
    return fnv1a64(s.data(), s.size(), h);
}

inline std::uint64_t hash_doubles(const double* data, std::size_t n,
                                  std::uint64_t h = kFnvOffset) {
    return fnv1a64(data, n * sizeof(double), h);
}

inline std::uint64_t hash_kernel(const Kernel1D& k) {
    std::uint64_t h = fnv1a64(to_string(k.support));
    const std::int64_t dims[2] = {k.grid.n_steps, 0};
    h = fnv1a64(dims, sizeof(dims), h);
    h = hash_doubles(&k.grid.t_max, 1, h);
    return hash_doubles(k.values.data(), k.values.size(), h);
}

inline std::uint64_t hash_kernel(const Kernel2D& k) {
    const std::int64_t dims[2] = {k.values.rows(), k.values.cols()};
    std::uint64_t h = fnv1a64(dims, sizeof(dims));
    h = hash_doubles(&k.grid.t_max, 1, h);
    // matrix is column-major and dense; hash the contiguous storage
    return hash_doubles(k.values.data(), static_cast<std::size_t>(k.values.size()), h);
}

inline std::uint64_t hash_spectrum(const Spectrum& s) {
    const std::int64_t dims[1] = {s.grid.n_freq};
    std::uint64_t h = fnv1a64(dims, sizeof(dims));
    h = hash_doubles(&s.grid.omega_max, 1, h);
    return fnv1a64(s.values.data(), s.values.size() * sizeof(std::complex<double>), h);
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace qbm
