#pragma once

#include <cstdint>

namespace rfidloc {

// splitmix64 finalizer; good avalanche, cheap
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based seed derivation: draws for (stream, counter) pairs are
// independent of evaluation order and thread scheduling.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                 std::uint64_t counter) {
  std::uint64_t h = mix64(base);
  h = mix64(h ^ (stream + 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ (counter + 0xd1b54a32d192ed03ULL));
  return h;
}

}  // namespace rfidloc
