#pragma once

#include <cstdint>
#include <random>

namespace dtaas {

using Rng = std::mt19937_64;

/// Independent stream families. Values are part of the seed-derivation rule
/// and must never be renumbered.
enum class Stream : std::uint64_t {
    Burst = 1,
    Arrivals = 2,
    Channel = 3,
    ForecasterInit = 4,
    RiskSampling = 5,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Stream seed = splitmix64 chained over (master, slice, family, index).
/// Each slice owns its own streams, so adding slices never perturbs the
/// sequences of existing ones.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t slice, Stream family,
                                           std::uint64_t index = 0) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ slice);
    h = splitmix64(h ^ static_cast<std::uint64_t>(family));
    return splitmix64(h ^ index);
}

inline Rng make_rng(std::uint64_t master, std::uint64_t slice, Stream family, std::uint64_t index = 0) {
    return Rng(derive_seed(master, slice, family, index));
}

}  // namespace dtaas
