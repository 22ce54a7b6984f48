#pragma once

#include <cstdint>
#include <random>

namespace rsc {

// splitmix64; used to derive independent engine seeds from (master, stream ids).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t purpose = 0) {
  std::uint64_t s = mix64(master);
  s = mix64(s ^ (0x517cc1b727220a95ULL + stream));
  s = mix64(s ^ (0x2545f4914f6cdd1dULL + purpose));
  return s;
}

// One engine per (master seed, replica stream, purpose tag). Replica results
// are therefore independent of scheduling order.
inline std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t stream,
                                   std::uint64_t purpose = 0) {
  return std::mt19937_64(derive_seed(master, stream, purpose));
}

}  // namespace rsc
