#pragma once

#include <cstdint>

namespace ldm {

/// Seed for the run-th stream derived from a base seed (splitmix64
/// finalizer over base + run * golden ratio).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t run) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (run + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace ldm
