#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ldm {

inline constexpr int kMaxBits = 24;

/// Explicit probability vector over K-bit strings. Bit i of the state index
/// is the value of site i (little-endian: site 0 is the least significant
/// bit).
class FiniteDist {
public:
  /// Validates nonnegativity and unit mass (within 1e-12).
  FiniteDist(int bits, std::vector<double> probs);

  static FiniteDist uniform(int bits);
  static FiniteDist point(int bits, std::uint64_t state);

  /// Rescales an arbitrary nonnegative weight vector to unit mass.
  static FiniteDist from_weights(int bits, std::vector<double> weights);

  int bits() const { return bits_; }
  std::size_t states() const { return probs_.size(); }
  double operator[](std::size_t x) const { return probs_[x]; }
  std::span<const double> probs() const { return probs_; }

  /// Marginal on `sites`; bit j of the result is sites[j].
  FiniteDist marginal(std::span<const int> sites) const;

private:
  int bits_;
  std::vector<double> probs_;
};

/// Gathers the bits of `state` at `sites` into a compact index.
inline std::uint64_t gather_bits(std::uint64_t state, std::span<const int> sites) {
  std::uint64_t out = 0;
  for (std::size_t j = 0; j < sites.size(); ++j) out |= ((state >> sites[j]) & 1u) << j;
  return out;
}

/// Inverse of gather_bits: writes the bits of `packed` at `sites`.
inline std::uint64_t scatter_bits(std::uint64_t packed, std::span<const int> sites) {
  std::uint64_t out = 0;
  for (std::size_t j = 0; j < sites.size(); ++j) out |= ((packed >> j) & 1u) << sites[j];
  return out;
}

inline std::uint64_t site_mask(std::span<const int> sites) {
  std::uint64_t m = 0;
  for (int s : sites) m |= std::uint64_t{1} << s;
  return m;
}

/// CSV with header "index,probability".
void write_dist_csv(const std::string& path, const FiniteDist& p);
FiniteDist read_dist_csv(const std::string& path, int bits);

}  // namespace ldm
