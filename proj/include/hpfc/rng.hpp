#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace hpfc {

// splitmix64 round; the standard seed expander.
inline uint64_t splitmix64(uint64_t& s) {
    uint64_t z = (s += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Decorrelated per-run seed; pure so concurrent runs need no shared state.
inline uint64_t derive_run_seed(uint64_t master, uint64_t run_index) {
    uint64_t s = master ^ (0xD1B54A32D192ED03ull * (run_index + 1));
    uint64_t a = splitmix64(s);
    uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

// Uniform double in [0, 1) from the top 53 bits of the engine output.
inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Box-Muller normal generator.  std::normal_distribution is implementation-
// defined across standard libraries; this keeps logs byte-identical anywhere.
class GaussianGen {
public:
    explicit GaussianGen(uint64_t seed) : eng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01(eng_);
        while (u1 <= 0.0) u1 = uniform01(eng_);  // log(0) guard
        double u2 = uniform01(eng_);
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace hpfc
