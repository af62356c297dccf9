#include "collage/rng.hpp"

#include <cmath>

namespace collage {

double Rng::gaussian() {
    const double u1 = uniform01_open_zero();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

uint64_t Rng::next_below(uint64_t bound) {
    const uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const uint64_t r = next_u64();
        if (r >= threshold) return r % bound;
    }
}

}  // namespace collage
