#pragma once

// Seeded draws with pinned algorithms. std::*_distribution output is
// implementation-defined, which would break byte-identical reruns across
// toolchains, so uniform/normal/Laplace are generated here from raw
// mt19937_64 bits.

#include <cmath>
#include <cstdint>
#include <random>

namespace xdldi {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1): 53 mantissa bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; caches the second draw.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Unit-variance Laplace (scale 1/sqrt(2)).
    double laplace() {
        const double u = uniform() - 0.5;
        const double scale = 1.0 / std::sqrt(2.0);
        return -scale * std::copysign(std::log1p(-2.0 * std::abs(u)), u);
    }

    std::uint64_t raw() { return engine_(); }

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace xdldi
