#pragma once

#include <cstdint>

namespace eevo {

// Counter-based generator: word(i) is the SplitMix64 finalizer applied to
// seed + (i+1)*GOLDEN_GAMMA, i.e. the (i+1)-th output of a SplitMix64
// stream seeded with `seed`. Stateless, so any word can be addressed
// directly and the mapping from (seed, index) to bits is fixed.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t word(std::uint64_t index) const;

    // [0, 1), 53 random bits.
    double uniform(std::uint64_t index) const;

    // Approximate standard normal: sum of 12 uniforms minus 6 (Irwin-Hall).
    // Uses only IEEE +,*, so the sample is bit-identical across platforms.
    // Consumes words 12*index .. 12*index+11.
    double gaussian(std::uint64_t index) const;

private:
    std::uint64_t seed_;
};

}  // namespace eevo
