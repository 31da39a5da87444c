#pragma once

#include "netfactor/types.hpp"

#include <cstdint>
#include <random>

namespace netfactor {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of substream `index` under `root`. `tag` separates unrelated uses of
/// the same root (null draws, permutations, replicates, ...).
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(root ^ splitmix64(tag)) + index);
}

inline Rng make_rng(std::uint64_t root, std::uint64_t tag, std::uint64_t index) {
    return Rng(derive_seed(root, tag, index));
}

namespace stream {
inline constexpr std::uint64_t kNullDraws = 0x6e756c6c;     // "null"
inline constexpr std::uint64_t kPermutations = 0x7065726d;  // "perm"
inline constexpr std::uint64_t kReplicates = 0x7265706c;    // "repl"
inline constexpr std::uint64_t kGenerator = 0x67656e;       // "gen"
inline constexpr std::uint64_t kLanczos = 0x6c616e63;       // "lanc"
}  // namespace stream

/// Fills a matrix with i.i.d. N(0, 1) draws in column-major order.
inline Matrix standard_normal(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix out(rows, cols);
    double* data = out.data();
    for (Index i = 0; i < out.size(); ++i) data[i] = dist(rng);
    return out;
}

}  // namespace netfactor
