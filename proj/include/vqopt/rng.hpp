#pragma once

#include <cmath>
#include <cstdint>

namespace vqopt {

/// Counter-based 64-bit generator. Output for counter k under seed s is
/// mix(s + (k+1) * 0x9E3779B97F4A7C15), the Weyl sequence with the golden
/// gamma fed through the splitmix64 finalizer:
///
///   z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9;
///   z ^= z >> 27;  z *= 0x94D049BB133111EB;
///   z ^= z >> 31;
///
/// The same (seed, counter) pair always yields the same stream, independent
/// of call order or platform, which is what makes generated instances
/// regenerate bit-identically. Normal variates use the Box-Muller transform
/// on consecutive counter outputs.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0)
        : seed_(seed), counter_(counter) {}

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    static std::uint64_t at(std::uint64_t seed, std::uint64_t counter) {
        return mix(seed + (counter + 1) * 0x9E3779B97F4A7C15ULL);
    }

    std::uint64_t next_u64() { return at(seed_, counter_++); }

    /// Uniform on [0, 1), 53 mantissa bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1]; used as the log argument in Box-Muller.
    double uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the second variate of each pair is
    /// cached so draws come in deterministic (counter, counter+1) pairs.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// FNV-1a 64-bit; stable across platforms, used for cache keys.
inline std::uint64_t fnv1a64(const char* data, std::size_t len) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace vqopt
