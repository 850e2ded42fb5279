#pragma once

#include <cstdint>
#include <random>

#include "cr3bp/types.hpp"

namespace cr3bp {

// Deterministic random source. Distributions are written out explicitly so
// the same seed gives the same stream on every compiler (std:: distribution
// algorithms are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

    template <std::size_t N>
    std::array<double, N> gaussian_vec() {
        std::array<double, N> v{};
        for (auto& x : v) x = gaussian();
        return v;
    }

    // Uniform point on the unit sphere of R^N.
    template <std::size_t N>
    std::array<double, N> unit_vec() {
        while (true) {
            auto v = gaussian_vec<N>();
            const double n = norm(v);
            if (n > 1e-12) return (1.0 / n) * v;
        }
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace cr3bp
