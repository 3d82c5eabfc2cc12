#include "spca/rng.hpp"

#include <cmath>
#include <numbers>

namespace spca {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 output finalizer
inline std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) {
    key_ = mix(seed + kGolden) ^ mix(stream * 0xD2B74407B1CE6E93ULL + 0x8CB92BA72F3D8DD7ULL);
    counter_ = 0;
}

CounterRng CounterRng::derived(std::uint64_t tag) const {
    CounterRng child;
    child.key_ = mix(key_ ^ mix(tag + 0xA0761D6478BD642FULL));
    child.counter_ = 0;
    return child;
}

std::uint64_t CounterRng::next_u64() {
    ++counter_;
    return mix(key_ + counter_ * kGolden);
}

double CounterRng::next_unit() {
    // 53 uniform bits; map [0,1) -> (0,1] so log() stays finite
    return 1.0 - static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::next_gaussian() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace spca
