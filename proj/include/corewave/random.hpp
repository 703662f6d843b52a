#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace corewave {

/**
 * Seeded normal sampler with output fixed by the seed alone: mt19937_64 is
 * specified bit-for-bit, and the Box-Muller step below is ours rather than the
 * implementation-defined std::normal_distribution.
 */
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

    double uniform() {
        // 53 random bits in (0, 1)
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double a = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double operator()(double mean, double sd) { return mean + sd * (*this)(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0;
    bool has_spare_ = false;
};

}  // namespace corewave
