#include "ldm/finite_dist.hpp"

#include <cmath>
#include <stdexcept>

#include "ldm/csv.hpp"

namespace ldm {

namespace {

void check_bits(int bits) {
  if (bits < 0 || bits > kMaxBits) {
    throw std::invalid_argument("FiniteDist supports 0.." + std::to_string(kMaxBits) + " bits, got " +
                                std::to_string(bits));
  }
}

// Compensated sum; plain accumulation over 2^18 entries drifts past 1e-12.
double mass(const std::vector<double>& v) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace

FiniteDist::FiniteDist(int bits, std::vector<double> probs) : bits_(bits), probs_(std::move(probs)) {
  check_bits(bits);
  if (probs_.size() != (std::size_t{1} << bits)) {
    throw std::invalid_argument("FiniteDist: expected 2^" + std::to_string(bits) + " entries, got " +
                                std::to_string(probs_.size()));
  }
  for (std::size_t x = 0; x < probs_.size(); ++x) {
    if (!(probs_[x] >= 0.0) || !std::isfinite(probs_[x])) {
      throw std::invalid_argument("FiniteDist: entry " + std::to_string(x) + " is negative or not finite");
    }
  }
  const double total = mass(probs_);
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("FiniteDist: total mass " + std::to_string(total) + " differs from 1");
  }
}

FiniteDist FiniteDist::uniform(int bits) {
  check_bits(bits);
  std::size_t n = std::size_t{1} << bits;
  return FiniteDist(bits, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

FiniteDist FiniteDist::point(int bits, std::uint64_t state) {
  check_bits(bits);
  std::vector<double> p(std::size_t{1} << bits, 0.0);
  if (state >= p.size()) throw std::invalid_argument("FiniteDist::point: state out of range");
  p[state] = 1.0;
  return FiniteDist(bits, std::move(p));
}

FiniteDist FiniteDist::from_weights(int bits, std::vector<double> w) {
  check_bits(bits);
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("from_weights: invalid weight");
  }
  const double total = mass(w);
  if (!(total > 0.0)) throw std::invalid_argument("from_weights: weights sum to zero");
  for (double& v : w) v /= total;
  return FiniteDist(bits, std::move(w));
}

FiniteDist FiniteDist::marginal(std::span<const int> sites) const {
  for (int s : sites) {
    if (s < 0 || s >= bits_) throw std::invalid_argument("marginal: site outside distribution");
  }
  std::vector<double> out(std::size_t{1} << sites.size(), 0.0);
  for (std::size_t x = 0; x < probs_.size(); ++x) {
    if (probs_[x] != 0.0) out[gather_bits(x, sites)] += probs_[x];
  }
  return from_weights(static_cast<int>(sites.size()), std::move(out));
}

void write_dist_csv(const std::string& path, const FiniteDist& p) {
  CsvWriter w(path, {"index", "probability"});
  for (std::size_t x = 0; x < p.states(); ++x) {
    w.cell(x).cell(p[x]);
    w.end_row();
  }
}

FiniteDist read_dist_csv(const std::string& path, int bits) {
  auto table = read_csv(path);
  std::vector<double> probs(std::size_t{1} << bits, 0.0);
  for (const auto& row : table.rows) {
    if (row.size() != 2) throw std::runtime_error(path + ": expected index,probability rows");
    auto idx = static_cast<std::size_t>(row[0]);
    if (row[0] < 0 || static_cast<double>(idx) != row[0] || idx >= probs.size()) {
      throw std::runtime_error(path + ": bad state index");
    }
    probs[idx] = row[1];
  }
  return FiniteDist(bits, std::move(probs));
}

}  // namespace ldm
