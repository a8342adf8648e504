#include "eevo/rng.hpp"

namespace eevo {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

std::uint64_t mix(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t CounterRng::word(std::uint64_t index) const {
    return mix(seed_ + (index + 1) * kGoldenGamma);
}

double CounterRng::uniform(std::uint64_t index) const {
    return static_cast<double>(word(index) >> 11) * 0x1.0p-53;
}

double CounterRng::gaussian(std::uint64_t index) const {
    double sum = 0.0;
    for (std::uint64_t k = 0; k < 12; ++k) {
        sum += uniform(12 * index + k);
    }
    return sum - 6.0;
}

}  // namespace eevo
