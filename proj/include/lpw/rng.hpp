#pragma once
#include <cstdint>
#include <random>
#include <cmath>

namespace lpw {

// mt19937_64 plus a polar-method normal. We roll the normal ourselves so that
// streams are reproducible across standard-library implementations
// (std::normal_distribution is not pinned by the standard).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {
        // 53-bit mantissa uniform in (0,1)
        return ((eng_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace lpw
