#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace codesift {

/// 32-byte SHA-256 digest of a byte string. Equal content <=> equal digest;
/// a collision is treated as equality everywhere downstream.
using Sha256Digest = std::array<unsigned char, 32>;

Sha256Digest sha256(std::string_view bytes);
std::string to_hex(const Sha256Digest& digest);

/// SplitMix64 step. Used to derive per-slot hash parameters and sampling
/// coins from a single master seed, so runs are reproducible across
/// platforms and worker counts.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stateless variant: one mixed output for a single input word.
inline std::uint64_t mix64(std::uint64_t x) {
    std::uint64_t s = x;
    return splitmix64(s);
}

/// FNV-1a over bytes, then finalized with mix64 for better avalanche.
inline std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t seed = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(h);
}

/// Deterministic coin in [0,1) keyed by (seed, key). Independent of the
/// order documents are visited in.
inline double hash_coin(std::uint64_t seed, std::string_view key) {
    std::uint64_t h = hash_bytes(key, seed);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace codesift
