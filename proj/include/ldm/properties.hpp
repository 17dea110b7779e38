#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ldm/discrete.hpp"
#include "ldm/finite_dist.hpp"
#include "ldm/gaussian.hpp"
#include "ldm/lattice.hpp"

namespace ldm {

/// Random instance generators shared by the property suites.
FiniteDist random_dist(int bits, std::mt19937_64& rng);
LocalChannel random_local_channel(const Region& sites, std::mt19937_64& rng);
Eigen::MatrixXd random_spd(Eigen::Index n, std::mt19937_64& rng);

/// A random 1D or 2D lattice with at most max_bits sites and a random
/// tripartition on it (block size k, width r, any center).
struct RandomPartition {
  Lattice lat;
  Tripartition part;
};
RandomPartition random_partition(int max_bits, std::mt19937_64& rng);

struct SuiteReport {
  std::string name;
  int instances = 0;
  int violations = 0;
  /// Largest value of (lhs - rhs) seen; nonpositive when no violation.
  double worst_excess = -std::numeric_limits<double>::infinity();
};

/// Discrete instances (P, local channel on A, tripartition), K <= 10:
/// "pinsker" 2 TV^2 <= KL, "recovery" KL <= CMI + 1e-9 and
/// "cmi-difference" KL <= I_before - I_after + 1e-9, for the local Bayes
/// recovery of the channel.
std::vector<SuiteReport> discrete_recovery_suite(int instances, std::uint64_t seed);

/// Gaussian instances (random SPD prior, random linear channel on A):
/// KL <= CMI + 1e-9 and KL <= I_before - I_after + 1e-9.
std::vector<SuiteReport> gaussian_recovery_suite(int instances, std::uint64_t seed);

}  // namespace ldm
