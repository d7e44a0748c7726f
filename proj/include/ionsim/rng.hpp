#ifndef IONSIM_RNG_HPP
#define IONSIM_RNG_HPP

// Counter-based random streams: stream (seed, index) is derived purely
// from the two integers, so trials can be evaluated in any order or in
// parallel with bit-identical aggregate results.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ionsim {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) {
        SplitMix64 g(seed ^ (index * 0x9E3779B97F4A7C15ULL));
        g.next(); // decorrelate nearby indices
        g.next();
        return g;
    }

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double uniform() { // in [0, 1)
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    double gaussian() {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

} // namespace ionsim

#endif
