#pragma once

#include <cstdint>
#include <random>

namespace fdel::detail {

using Rng = std::mt19937_64;

/// Generator for a single seed; seed_seq spreads the 64-bit seed over the state.
inline Rng make_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Rng(seq);
}

/// Independent stream for replicate `index` under `base` (counter-based, order-free).
inline Rng make_stream(std::uint64_t base, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x6664656cU};
    return Rng(seq);
}

/// 64-bit seed for replicate `index` of an experiment seeded with `base`.
inline std::uint64_t stream_seed(std::uint64_t base, std::uint64_t index) {
    return make_stream(base, index)();
}

}  // namespace fdel::detail
