#pragma once

#include <cstdint>
#include <random>

namespace gpgrad {

using RngEngine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Independent, reproducible stream for a (master seed, counter) pair.
// Streams derived by counter keep concurrent work deterministic.
inline RngEngine make_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
  std::uint64_t s = master_seed ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return RngEngine(a ^ (b << 1));
}

}  // namespace gpgrad
