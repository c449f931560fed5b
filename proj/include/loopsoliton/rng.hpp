#ifndef LOOPSOLITON_RNG_HPP
#define LOOPSOLITON_RNG_HPP

#include <cstdint>

#include "common.hpp"

namespace loopsoliton {

// splitmix64: tiny, seedable, identical output on every platform.
// std::uniform_real_distribution is implementation-defined, which would
// break byte-identical reports across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    cx complex_in_disc(const cx& center, double radius) {
        // Rejection-free: sqrt-radial for uniform area density.
        double r = radius * std::sqrt(uniform());
        double phi = 2.0 * pi * uniform();
        return center + cx(r * std::cos(phi), r * std::sin(phi));
    }

    cx complex_in_box(double re_lo, double re_hi, double im_lo, double im_hi) {
        return cx(uniform(re_lo, re_hi), uniform(im_lo, im_hi));
    }

private:
    std::uint64_t state_;
};

} // namespace loopsoliton

#endif
