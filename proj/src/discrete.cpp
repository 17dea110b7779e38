#include "ldm/discrete.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ldm/errors.hpp"
#include "ldm/infotools.hpp"

namespace ldm {

namespace {

void check_sites(const Region& r, int bits, const char* what) {
  for (int s : r) {
    if (s >= bits) throw std::invalid_argument(std::string(what) + ": site " + std::to_string(s) + " outside distribution");
  }
}

// Mass is conserved analytically by every channel; renormalizing absorbs
// rounding so FiniteDist's 1e-12 check never trips on long chains.
FiniteDist renormalized(int bits, std::vector<double> w) {
  for (double& v : w) {
    if (v < 0.0) {
      if (v < -1e-12) throw NumericError("channel produced a negative probability");
      v = 0.0;
    }
  }
  return FiniteDist::from_weights(bits, std::move(w));
}

std::vector<int> complement(const Region& r, int bits) {
  std::vector<int> out;
  for (int s = 0; s < bits; ++s) {
    if (!r.contains(s)) out.push_back(s);
  }
  return out;
}

}  // namespace

FlipChannel::FlipChannel(double prob, Region s) : p(prob), sites(std::move(s)) {
  if (!(prob >= 0.0 && prob <= 0.5)) throw std::invalid_argument("FlipChannel: p must lie in [0, 1/2]");
}

FiniteDist apply_flip(const FlipChannel& ch, const FiniteDist& p) {
  check_sites(ch.sites, p.bits(), "apply_flip");
  std::vector<double> w(p.probs().begin(), p.probs().end());
  const double q = ch.p;
  for (int s : ch.sites) {
    const std::uint64_t bit = std::uint64_t{1} << s;
    for (std::uint64_t x = 0; x < w.size(); ++x) {
      if (x & bit) continue;
      const double a = w[x];
      const double b = w[x | bit];
      w[x] = (1.0 - q) * a + q * b;
      w[x | bit] = q * a + (1.0 - q) * b;
    }
  }
  return renormalized(p.bits(), std::move(w));
}

double flip_time(double p) {
  if (!(p >= 0.0 && p <= 0.5)) throw std::invalid_argument("flip_time: p must lie in [0, 1/2]");
  if (p == 0.5) return std::numeric_limits<double>::infinity();
  return -std::log1p(-2.0 * p);
}

LocalChannel::LocalChannel(Region sites, std::vector<std::vector<double>> kernel)
    : sites_(std::move(sites)), kernel_(std::move(kernel)) {
  if (sites_.size() > 12) throw std::invalid_argument("LocalChannel: at most 12 sites");
  const std::size_t n = std::size_t{1} << sites_.size();
  if (kernel_.size() != n) throw std::invalid_argument("LocalChannel: kernel must be 2^|sites| square");
  for (const auto& row : kernel_) {
    if (row.size() != n) throw std::invalid_argument("LocalChannel: kernel must be 2^|sites| square");
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("LocalChannel: negative transition probability");
    }
  }
  for (std::size_t x = 0; x < n; ++x) {
    double col = 0.0;
    for (std::size_t y = 0; y < n; ++y) col += kernel_[y][x];
    if (std::abs(col - 1.0) > 1e-12) throw std::invalid_argument("LocalChannel: column " + std::to_string(x) + " does not sum to 1");
  }
}

LocalChannel LocalChannel::flip(const Region& sites, double p) {
  if (!(p >= 0.0 && p <= 0.5)) throw std::invalid_argument("LocalChannel::flip: p must lie in [0, 1/2]");
  const std::size_t n = std::size_t{1} << sites.size();
  std::vector<std::vector<double>> k(n, std::vector<double>(n));
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const int flips = std::popcount(x ^ y);
      k[y][x] = std::pow(p, flips) * std::pow(1.0 - p, static_cast<int>(sites.size()) - flips);
    }
  }
  return LocalChannel(sites, std::move(k));
}

LocalChannel LocalChannel::reset(const Region& sites) {
  const std::size_t n = std::size_t{1} << sites.size();
  std::vector<std::vector<double>> k(n, std::vector<double>(n, 0.0));
  for (std::size_t x = 0; x < n; ++x) k[0][x] = 1.0;
  return LocalChannel(sites, std::move(k));
}

FiniteDist apply(const LocalChannel& ch, const FiniteDist& p) {
  check_sites(ch.sites(), p.bits(), "apply");
  const auto& sites = ch.sites().sites();
  const std::uint64_t mask = site_mask(sites);
  const std::size_t n = ch.local_states();
  std::vector<std::uint64_t> offs(n);
  for (std::size_t x = 0; x < n; ++x) offs[x] = scatter_bits(x, sites);
  std::vector<double> out(p.states(), 0.0);
  std::vector<double> local(n);
  for (std::uint64_t base = 0; base < p.states(); ++base) {
    if (base & mask) continue;
    for (std::size_t x = 0; x < n; ++x) local[x] = p[base | offs[x]];
    for (std::size_t y = 0; y < n; ++y) {
      double acc = 0.0;
      for (std::size_t x = 0; x < n; ++x) acc += ch(y, x) * local[x];
      out[base | offs[y]] = acc;
    }
  }
  return renormalized(p.bits(), std::move(out));
}

FiniteDist apply(std::span<const LocalChannel> chs, const FiniteDist& p) {
  FiniteDist cur = p;
  for (const auto& ch : chs) cur = apply(ch, cur);
  return cur;
}

RecoveryChannel::RecoveryChannel(Region target, Region context, std::vector<std::vector<std::vector<double>>> table,
                                 std::size_t undefined_conditionals)
    : target_(std::move(target)), context_(std::move(context)), table_(std::move(table)), undefined_(undefined_conditionals) {
  for (int s : target_) {
    if (context_.contains(s)) throw std::invalid_argument("RecoveryChannel: target and context overlap");
  }
  if (table_.size() != (std::size_t{1} << context_.size())) {
    throw std::invalid_argument("RecoveryChannel: table does not match context size");
  }
}

FiniteDist apply(const RecoveryChannel& ch, const FiniteDist& p) {
  check_sites(ch.target(), p.bits(), "apply");
  check_sites(ch.context(), p.bits(), "apply");
  const auto& tgt = ch.target().sites();
  const auto& ctx = ch.context().sites();
  const std::uint64_t mask = site_mask(tgt);
  const std::size_t n = std::size_t{1} << tgt.size();
  std::vector<std::uint64_t> offs(n);
  for (std::size_t x = 0; x < n; ++x) offs[x] = scatter_bits(x, tgt);
  std::vector<double> out(p.states(), 0.0);
  for (std::uint64_t state = 0; state < p.states(); ++state) {
    const double w = p[state];
    if (w == 0.0) continue;
    const std::uint64_t y = gather_bits(state, tgt);
    const std::uint64_t c = gather_bits(state, ctx);
    const std::uint64_t base = state & ~mask;
    for (std::size_t x = 0; x < n; ++x) out[base | offs[x]] += ch(c, y, x) * w;
  }
  return renormalized(p.bits(), std::move(out));
}

RecoveryChannel local_bayes_channel(const LocalChannel& ch, const FiniteDist& p_ab, const Region& b) {
  const int na = static_cast<int>(ch.sites().size());
  const int nb = static_cast<int>(b.size());
  if (p_ab.bits() != na + nb) throw std::invalid_argument("local_bayes_channel: marginal must cover A then B");
  for (int s : b) {
    if (ch.sites().contains(s)) throw std::invalid_argument("local_bayes_channel: B overlaps A");
  }
  const std::size_t n = std::size_t{1} << na;
  const std::size_t nctx = std::size_t{1} << nb;
  std::vector<std::vector<std::vector<double>>> table(nctx, std::vector<std::vector<double>>(n, std::vector<double>(n)));
  std::size_t undefined = 0;
  for (std::size_t c = 0; c < nctx; ++c) {
    const std::uint64_t hi = static_cast<std::uint64_t>(c) << na;
    for (std::size_t y = 0; y < n; ++y) {
      double denom = 0.0;
      for (std::size_t x = 0; x < n; ++x) denom += ch(y, x) * p_ab[hi | x];
      auto& row = table[c][y];
      if (denom > 0.0) {
        for (std::size_t x = 0; x < n; ++x) row[x] = ch(y, x) * p_ab[hi | x] / denom;
        continue;
      }
      ++undefined;
      std::size_t support = 0;
      for (std::size_t x = 0; x < n; ++x) support += p_ab[hi | x] > 0.0;
      for (std::size_t x = 0; x < n; ++x) {
        row[x] = support == 0 ? 1.0 / static_cast<double>(n) : (p_ab[hi | x] > 0.0 ? 1.0 / static_cast<double>(support) : 0.0);
      }
    }
  }
  return RecoveryChannel(ch.sites(), b, std::move(table), undefined);
}

RecoveryChannel local_bayes_channel_from(const LocalChannel& ch, const FiniteDist& p, const Region& b) {
  std::vector<int> ab(ch.sites().begin(), ch.sites().end());
  ab.insert(ab.end(), b.begin(), b.end());
  return local_bayes_channel(ch, p.marginal(ab), b);
}

RecoveryChannel bayes_channel(const LocalChannel& ch, const FiniteDist& p) {
  check_sites(ch.sites(), p.bits(), "bayes_channel");
  return local_bayes_channel_from(ch, p, Region(complement(ch.sites(), p.bits())));
}

RateGenerator::RateGenerator(int bits, std::vector<Jump> jumps) : bits_(bits), jumps_(std::move(jumps)) {
  if (bits < 0 || bits > kMaxBits) throw std::invalid_argument("RateGenerator: bit count out of range");
  const std::uint64_t n = std::uint64_t{1} << bits;
  for (const auto& j : jumps_) {
    if (j.from >= n || j.to >= n) throw std::invalid_argument("RateGenerator: state out of range");
    if (j.from == j.to) throw std::invalid_argument("RateGenerator: diagonal rates are implied");
    if (!(j.rate >= 0.0) || !std::isfinite(j.rate)) throw std::invalid_argument("RateGenerator: negative rate");
  }
}

RateGenerator RateGenerator::flips(int bits, const Region& sites, double rate) {
  std::vector<Jump> jumps;
  const std::uint64_t n = std::uint64_t{1} << bits;
  for (std::uint64_t x = 0; x < n; ++x) {
    for (int s : sites) jumps.push_back({x, x ^ (std::uint64_t{1} << s), rate});
  }
  return RateGenerator(bits, std::move(jumps));
}

std::vector<double> RateGenerator::apply(std::span<const double> p) const {
  if (p.size() != (std::size_t{1} << bits_)) throw std::invalid_argument("RateGenerator::apply: size mismatch");
  std::vector<double> out(p.size(), 0.0);
  for (const auto& j : jumps_) {
    const double flow = j.rate * p[j.from];
    out[j.to] += flow;
    out[j.from] -= flow;
  }
  return out;
}

RateGenerator reverse_rates(const RateGenerator& gen, const FiniteDist& p) {
  if (gen.bits() != p.bits()) throw std::invalid_argument("reverse_rates: bit count mismatch");
  std::vector<RateGenerator::Jump> rev;
  rev.reserve(gen.jumps().size());
  for (const auto& j : gen.jumps()) {
    if (j.rate == 0.0 || p[j.from] == 0.0) continue;
    if (p[j.to] == 0.0) {
      std::ostringstream os;
      os << "reverse_rates: state " << j.to << " is reachable but has zero probability";
      throw std::invalid_argument(os.str());
    }
    rev.push_back({j.to, j.from, j.rate * p[j.from] / p[j.to]});
  }
  return RateGenerator(gen.bits(), std::move(rev));
}

FiniteDist integrate_master(const std::function<RateGenerator(double)>& gen, const FiniteDist& p0, double duration,
                            int steps) {
  if (steps < 1) throw std::invalid_argument("integrate_master: need at least one step");
  if (!(duration >= 0.0)) throw std::invalid_argument("integrate_master: negative duration");
  const double h = duration / steps;
  std::vector<double> p(p0.probs().begin(), p0.probs().end());
  const std::size_t n = p.size();
  std::vector<double> tmp(n);
  auto axpy = [&](const std::vector<double>& k, double c) {
    for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + c * k[i];
    return tmp;
  };
  for (int step = 0; step < steps; ++step) {
    const double t = step * h;
    const RateGenerator g0 = gen(t);
    const RateGenerator gmid = gen(t + 0.5 * h);
    const RateGenerator g1 = gen(t + h);
    auto k1 = g0.apply(p);
    auto k2 = gmid.apply(axpy(k1, 0.5 * h));
    auto k3 = gmid.apply(axpy(k2, 0.5 * h));
    auto k4 = g1.apply(axpy(k3, h));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (p[i] < 0.0) {
        if (p[i] < -1e-9) {
          std::ostringstream os;
          os << "integrate_master: probability " << p[i] << " at state " << i << " in step " << step
             << "; the step size is too coarse";
          throw NumericError(os.str());
        }
        p[i] = 0.0;
      }
      total += p[i];
    }
    if (std::abs(total - 1.0) > 1e-9) {
      std::ostringstream os;
      os << "integrate_master: mass drifted to " << total << " in step " << step;
      throw NumericError(os.str());
    }
    for (double& v : p) v /= total;
  }
  return FiniteDist::from_weights(p0.bits(), std::move(p));
}

DiscreteRecovery local_recovery_chain(const FiniteDist& p0, const Lattice& lat, const std::vector<double>& flip_probs,
                                      int k, int r) {
  if (p0.bits() != lat.size()) throw std::invalid_argument("local_recovery_chain: bits != lattice size");
  const ReorgSchedule sched = reorganize(lat, k, r);
  struct Record {
    LocalChannel forward;
    Region buffer;
    FiniteDist prior;
  };
  std::vector<Record> records;
  FiniteDist cur = p0;
  for (double p : flip_probs) {
    for (const auto& sub : sched.substeps) {
      for (const auto& region : sub) {
        Record rec{LocalChannel::flip(region, p), tripartition_around(lat, region, r).b, cur};
        cur = apply(rec.forward, cur);
        records.push_back(std::move(rec));
      }
    }
  }
  DiscreteRecovery res{cur, std::vector<double>(records.size()), 0.0, 0.0, 0};
  for (std::size_t i = records.size(); i-- > 0;) {
    const auto& rec = records[i];
    const RecoveryChannel back = local_bayes_channel_from(rec.forward, rec.prior, rec.buffer);
    res.recovered = apply(back, res.recovered);
    res.channel_tv[i] = tv(apply(back, apply(rec.forward, rec.prior)), rec.prior);
    res.undefined_conditionals += back.undefined_conditionals();
  }
  res.tv_total = tv(p0, res.recovered);
  for (double v : res.channel_tv) res.tv_bound += v;
  return res;
}

}  // namespace ldm
