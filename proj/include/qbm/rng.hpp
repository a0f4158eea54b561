#pragma once
// Deterministic substream random numbers: a splitmix64 mix of
// (seed, stream index, kernel hash) seeds one mt19937_64 per trajectory, and
// Gaussians come from an explicit Box-Muller so draws do not depend on the
// standard library's normal_distribution implementation.

#include <cmath>
#include <cstdint>
#include <random>

namespace qbm {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index,
                                    std::uint64_t kernel_hash) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64_next(s);
    s ^= index;
    std::uint64_t b = splitmix64_next(s);
    s ^= kernel_hash;
    std::uint64_t c = splitmix64_next(s);
    return a ^ (b * 0x9E3779B97F4A7C15ull) ^ c;
}

class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform_open();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    // uniform in (0, 1): 53-bit mantissa offset away from zero
    double uniform_open() {
        const std::uint64_t x = engine_();
        return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
    }

    std::mt19937_64 engine_;
    double spare_{0.0};
    bool have_spare_{false};
};

} // namespace qbm
