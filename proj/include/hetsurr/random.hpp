#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace hetsurr {

using Engine = std::mt19937_64;

// Purpose tags for derived random streams. Every random draw in the library
// comes from a stream keyed by (master seed, tag, index...), so results never
// depend on scheduling order.
enum class StreamTag : std::uint64_t {
  data = 1,
  split = 2,
  fit = 3,
  bootstrap = 4,
  tree = 5,
  oracle = 6,
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag,
                                 std::initializer_list<std::uint64_t> path = {}) {
  std::uint64_t h = derive_seed(seed, {static_cast<std::uint64_t>(tag)});
  for (std::uint64_t p : path) h = derive_seed(h, {p});
  return h;
}

inline Engine make_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Engine(seq);
}

inline Engine make_stream(std::uint64_t seed, StreamTag tag,
                          std::initializer_list<std::uint64_t> path = {}) {
  return make_engine(derive_seed(seed, tag, path));
}

}  // namespace hetsurr
