#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace cournot {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The key is the user seed; the upper half of the 128-bit counter carries the
/// stream index, so every (seed, stream) pair owns a disjoint counter range and
/// work items can be scheduled in any order without changing their draws.
class Philox4x32 {
public:
    using result_type = std::uint32_t;

    Philox4x32(std::uint64_t seed, std::uint64_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Next full 128-bit block; advances the counter by one.
    std::array<std::uint32_t, 4> next_block();

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> buffer_{};
    int buffered_ = 0;
};

/// Standard normal draws from a Philox stream by Box-Muller, two per block.
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t stream) : engine_(seed, stream) {}

    double next();

private:
    Philox4x32 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cournot
