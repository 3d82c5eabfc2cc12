#pragma once

#include <cstdint>
#include <initializer_list>

namespace spca {

// Counter-based generator built on the splitmix64 finalizer.  The state is a
// (key, counter) pair, so any output position is addressable directly and
// derived child streams reproduce bit-exactly no matter how work is scheduled
// across threads.
class CounterRng {
public:
    /// Identifier written into output files so results can name their generator.
    static constexpr const char* version = "splitmix64-ctr/v1";

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

    /// Child generator for an independent stream; pure function of (state key, tag).
    CounterRng derived(std::uint64_t tag) const;

    std::uint64_t next_u64();

    /// Uniform draw in (0, 1].
    double next_unit();

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double next_gaussian();

    std::uint64_t key() const { return key_; }

private:
    CounterRng() = default;

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

} // namespace spca
