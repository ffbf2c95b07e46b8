#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace shmtk {

// Seedable 64-bit generator with a pinned draw discipline so runs replay
// bit-exactly across platforms. std::uniform_int_distribution and
// std::normal_distribution are implementation-defined, so the mappings from
// raw mt19937_64 output live here instead.
class Rand64 {
public:
    explicit Rand64(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    // Uniform integer in [lo, hi], inclusive. Rejection sampling on the raw
    // stream; consumes a variable but deterministic number of draws.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        if (range == 0) return lo; // full 64-bit span
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
        std::uint64_t u;
        do {
            u = engine_();
        } while (u >= limit);
        return lo + static_cast<std::int64_t>(u % range);
    }

    // Uniform double in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller; draws two uniforms per pair, caches the second variate.
    double gaussian(double mean, double sigma) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + sigma * spare_;
        }
        double u1, u2;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return mean + sigma * r * std::cos(a);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace shmtk
