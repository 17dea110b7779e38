#include "ldm/properties.hpp"

#include <algorithm>
#include <cmath>

#include "ldm/infotools.hpp"

namespace ldm {

namespace {

constexpr double kSlack = 1e-9;

void record(SuiteReport& rep, double lhs, double rhs) {
  const double excess = lhs - rhs;
  rep.worst_excess = std::max(rep.worst_excess, excess);
  if (excess > kSlack) ++rep.violations;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

}  // namespace

FiniteDist random_dist(int bits, std::mt19937_64& rng) {
  std::exponential_distribution<double> ex(1.0);
  std::bernoulli_distribution hole(0.1);
  std::vector<double> w(std::size_t{1} << bits);
  for (double& v : w) v = hole(rng) ? 0.0 : ex(rng);
  if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) w[0] = 1.0;
  return FiniteDist::from_weights(bits, std::move(w));
}

LocalChannel random_local_channel(const Region& sites, std::mt19937_64& rng) {
  const std::size_t n = std::size_t{1} << sites.size();
  std::exponential_distribution<double> ex(1.0);
  std::bernoulli_distribution hole(0.2);
  std::vector<std::vector<double>> k(n, std::vector<double>(n));
  for (std::size_t x = 0; x < n; ++x) {
    double col = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      k[y][x] = hole(rng) ? 0.0 : ex(rng);
      col += k[y][x];
    }
    if (col == 0.0) {
      k[x][x] = 1.0;
      col = 1.0;
    }
    for (std::size_t y = 0; y < n; ++y) k[y][x] /= col;
    // Exact unit column sums after rounding.
    double rest = 1.0;
    for (std::size_t y = 0; y + 1 < n; ++y) rest -= k[y][x];
    k[n - 1][x] = std::max(0.0, rest);
  }
  return LocalChannel(sites, std::move(k));
}

Eigen::MatrixXd random_spd(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  Eigen::MatrixXd s = a * a.transpose() / static_cast<double>(n);
  s.diagonal().array() += 0.1;
  return 0.5 * (s + s.transpose());
}

RandomPartition random_partition(int max_bits, std::mt19937_64& rng) {
  const bool two_d = max_bits >= 4 && uniform_int(rng, 0, 2) == 0;
  int L = 0;
  int dim = 1;
  if (two_d) {
    dim = 2;
    L = max_bits >= 9 ? uniform_int(rng, 2, 3) : 2;
  } else {
    L = uniform_int(rng, 2, max_bits);
  }
  const bool periodic = uniform_int(rng, 0, 1) == 1;
  Lattice lat(dim, L, periodic);
  const int k = uniform_int(rng, 1, std::min(2, L - 1));
  const int r = uniform_int(rng, 0, 2);
  // Centers whose block fits an open lattice.
  const int lo = (k - 1) / 2;
  std::array<int, 2> c{uniform_int(rng, lo, L - k + lo), dim == 2 ? uniform_int(rng, lo, L - k + lo) : 0};
  return RandomPartition{lat, build_tripartition(lat, lat.site(c), k, r)};
}

std::vector<SuiteReport> discrete_recovery_suite(int instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SuiteReport pinsker{"pinsker", instances};
  SuiteReport recovery{"recovery", instances};
  SuiteReport diff{"cmi-difference", instances};
  for (int n = 0; n < instances; ++n) {
    const auto rp = random_partition(10, rng);
    const FiniteDist p = random_dist(rp.lat.size(), rng);
    const LocalChannel ch = random_local_channel(rp.part.a, rng);
    const FiniteDist q = apply(ch, p);
    const FiniteDist rec = apply(local_bayes_channel_from(ch, p, rp.part.b), q);
    const double div = kl(p, rec).nats;
    const double d = tv(p, rec);
    const double before = cmi(p, rp.part);
    const double after = cmi(q, rp.part);
    record(pinsker, 2.0 * d * d, div);
    record(recovery, div, before);
    record(diff, div, before - after);
  }
  return {pinsker, recovery, diff};
}

std::vector<SuiteReport> gaussian_recovery_suite(int instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  SuiteReport recovery{"gaussian-recovery", instances};
  SuiteReport diff{"gaussian-cmi-difference", instances};
  for (int n = 0; n < instances; ++n) {
    const auto rp = random_partition(6, rng);
    const Eigen::Index K = rp.lat.size();
    Eigen::VectorXd mean(K);
    for (auto& v : mean) v = g(rng);
    const GaussianDist p(mean, random_spd(K, rng));
    LinearChannel ch = LinearChannel::identity(K);
    const std::vector<int> a(rp.part.a.begin(), rp.part.a.end());
    const Eigen::MatrixXd noise = random_spd(static_cast<Eigen::Index>(a.size()), rng);
    for (std::size_t i = 0; i < a.size(); ++i) {
      ch.b[a[i]] = g(rng);
      for (std::size_t j = 0; j < a.size(); ++j) {
        ch.m(a[i], a[j]) = g(rng);
        ch.noise_cov(a[i], a[j]) = noise(i, j);
      }
    }
    const GaussianDist q = push(ch, p);
    const GaussianDist rec = push(local_bayes_reverse_from(ch, p, rp.part), q);
    const double div = gaussian_kl(p, rec);
    const double before = gaussian_cmi(p, rp.part);
    const double after = gaussian_cmi(q, rp.part);
    record(recovery, div, before);
    record(diff, div, before - after);
  }
  return {recovery, diff};
}

}  // namespace ldm
