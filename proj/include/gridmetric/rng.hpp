#pragma once

#include <cstdint>

namespace gridmetric {

// Counter-based random streams: every variate is a pure function of
// (seed, stream labels, counter). Replay-exact under any evaluation order,
// which is what makes lazy weight oracles and parallel trials deterministic.

namespace detail {
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// A named substream of the top-level seed. Streams derived with different
/// labels are independent for all practical purposes.
struct RngStream {
    uint64_t state;

    explicit RngStream(uint64_t seed) : state(detail::mix64(seed ^ 0xd1b54a32d192ed03ULL)) {}

    RngStream derive(uint64_t label) const {
        RngStream s(0);
        s.state = detail::mix64(state ^ detail::mix64(label + 0x8cb92ba72f3d8dd7ULL));
        return s;
    }
    RngStream derive2(uint64_t a, uint64_t b) const { return derive(a).derive(b); }

    /// Raw 64-bit value at the given counter.
    uint64_t bits(uint64_t counter) const { return detail::mix64(state + counter * 0x9e3779b97f4a7c15ULL); }

    /// Uniform double in [0, 1) at the given counter.
    double u01(uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }
};

/// Sequential view over a stream for samplers that consume a variable
/// number of uniforms (e.g. rejection sampling).
class RngSequence {
public:
    explicit RngSequence(RngStream s) : stream_(s) {}
    double u01() { return stream_.u01(counter_++); }
    uint64_t bits() { return stream_.bits(counter_++); }

private:
    RngStream stream_;
    uint64_t counter_ = 0;
};

}  // namespace gridmetric
