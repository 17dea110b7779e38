#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ldm/finite_dist.hpp"
#include "ldm/lattice.hpp"

namespace ldm {

/// Independent flip with probability p on each listed site.
struct FlipChannel {
  double p = 0.0;
  Region sites;

  FlipChannel(double p, Region sites);
};

FiniteDist apply_flip(const FlipChannel& ch, const FiniteDist& p);

/// Duration of the symmetric rate-1/2 master equation that realizes a flip
/// with probability p; +inf at p = 1/2.
double flip_time(double p);

/// Arbitrary stochastic map on the bits of `sites`: kernel[y][x] = N(y|x)
/// with x, y packed as in gather_bits. Columns sum to one.
class LocalChannel {
public:
  LocalChannel(Region sites, std::vector<std::vector<double>> kernel);

  static LocalChannel flip(const Region& sites, double p);
  /// Deterministic reset of every listed site to 0.
  static LocalChannel reset(const Region& sites);

  const Region& sites() const { return sites_; }
  std::size_t local_states() const { return kernel_.size(); }
  double operator()(std::uint64_t y, std::uint64_t x) const { return kernel_[y][x]; }

private:
  Region sites_;
  std::vector<std::vector<double>> kernel_;
};

FiniteDist apply(const LocalChannel& ch, const FiniteDist& p);

/// Applies the channels in order.
FiniteDist apply(std::span<const LocalChannel> chs, const FiniteDist& p);

/// Reverse channel that rewrites the bits of `target` given their current
/// value and the bits of `context` (disjoint from target).
/// table[ctx][y][x] = B(x_target | y_target, ctx).
class RecoveryChannel {
public:
  RecoveryChannel(Region target, Region context, std::vector<std::vector<std::vector<double>>> table,
                  std::size_t undefined_conditionals);

  const Region& target() const { return target_; }
  const Region& context() const { return context_; }
  double operator()(std::uint64_t ctx, std::uint64_t y, std::uint64_t x) const { return table_[ctx][y][x]; }
  /// Count of (context, y) pairs where N(P) vanished and the fallback was used.
  std::size_t undefined_conditionals() const { return undefined_; }

private:
  Region target_;
  Region context_;
  std::vector<std::vector<std::vector<double>>> table_;
  std::size_t undefined_;
};

FiniteDist apply(const RecoveryChannel& ch, const FiniteDist& p);

/// Exact Bayes reversal B(x|y) = N(y|x) P(x) / N(P)(y) of a channel acting
/// on A, reading the whole complement of A. Where N(P)(y) = 0 the
/// conditional falls back to uniform over the support of the prior at that
/// context and the event is counted.
RecoveryChannel bayes_channel(const LocalChannel& ch, const FiniteDist& p);

/// Local Bayes reversal reading A and B only. `p_ab` is the marginal on
/// the concatenation ch.sites() then b (bit j of p_ab is that j-th site).
RecoveryChannel local_bayes_channel(const LocalChannel& ch, const FiniteDist& p_ab, const Region& b);

/// Convenience: forms the marginal from the full distribution.
RecoveryChannel local_bayes_channel_from(const LocalChannel& ch, const FiniteDist& p, const Region& b);

/// Sparse jump rates lambda(to | from), to != from. The diagonal is implied
/// by the row-sum constraint.
class RateGenerator {
public:
  struct Jump {
    std::uint64_t from;
    std::uint64_t to;
    double rate;
  };

  RateGenerator(int bits, std::vector<Jump> jumps);

  /// Every listed site flips at `rate`.
  static RateGenerator flips(int bits, const Region& sites, double rate);

  int bits() const { return bits_; }
  const std::vector<Jump>& jumps() const { return jumps_; }
  /// dP/dt = L P.
  std::vector<double> apply(std::span<const double> p) const;

private:
  int bits_;
  std::vector<Jump> jumps_;
};

/// Generator of the time reversal against P: the jump y -> x gets rate
/// lambda(y|x) P(x) / P(y). Throws if a state targeted by a positive rate
/// from a state of positive probability has P = 0.
RateGenerator reverse_rates(const RateGenerator& gen, const FiniteDist& p);

/// RK4 integration of dP/dt = L(t) P over [0, duration]. The generator is
/// queried at t, t + h/2 and t + h of every step.
FiniteDist integrate_master(const std::function<RateGenerator(double)>& gen, const FiniteDist& p0, double duration,
                            int steps);

struct DiscreteRecovery {
  FiniteDist recovered;
  /// TV(B o N (P_before), P_before) for every local channel, forward order.
  std::vector<double> channel_tv;
  double tv_total = 0.0;
  double tv_bound = 0.0;
  std::size_t undefined_conditionals = 0;
};

/// Multi-step local recovery on a 1D/2D lattice of bits: each step applies
/// flips with probabilities flip_probs[n] on the reorganized k-blocks, then
/// the local Bayes channels (buffer width r) undo every block in reverse
/// order using the exact intermediate distributions.
DiscreteRecovery local_recovery_chain(const FiniteDist& p0, const Lattice& lat, const std::vector<double>& flip_probs,
                                      int k, int r);

}  // namespace ldm
