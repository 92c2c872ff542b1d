#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace slc {

using Rng = std::mt19937_64;

/// Stream tags separate the uses of one (seed, replicate) pair.
enum class StreamTag : std::uint32_t {
  spectrum = 1,
  hybrid = 2,
  kingman_reference = 3,
  tree_length = 4,
  kingman_tree_length = 5,
  validation = 6,
  cannings = 7,
};

/// Independent generator for (master seed, replicate index, tag); the same
/// triple always yields the same stream regardless of scheduling.
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t replicate, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(replicate),
                    static_cast<std::uint32_t>(replicate >> 32), tag};
  return Rng(seq);
}

inline Rng make_stream(std::uint64_t master_seed, std::uint64_t replicate, StreamTag tag) {
  return make_stream(master_seed, replicate, static_cast<std::uint32_t>(tag));
}

template <typename G>
double uniform01(G& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

template <typename G>
double exponential(G& rng, double rate) {
  return std::exponential_distribution<double>(rate)(rng);
}

template <typename G>
std::size_t uniform_index(G& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// 64-bit FNV-1a, used for config hashes.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace slc
