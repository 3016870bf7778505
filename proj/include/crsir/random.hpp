#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace crsir {

/// Seedable generator with a platform-independent stream.
///
/// The engine is std::mt19937_64, whose output sequence the standard fixes. Uniforms take
/// the top 53 bits; normals use the Box-Muller transform and are produced in pairs.
/// std::normal_distribution is avoided because its algorithm differs between libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace crsir
