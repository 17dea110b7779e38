#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ldm/errors.hpp"
#include "ldm/gaussian.hpp"
#include "ldm/properties.hpp"

using namespace ldm;

namespace {

Eigen::MatrixXd spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  return a * a.transpose() / n + 0.3 * Eigen::MatrixXd::Identity(n, n);
}

// Channel on the coordinates in `a`: random mixing there plus noise.
LinearChannel random_channel_on(int dim, const std::vector<int>& a, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  LinearChannel ch = LinearChannel::identity(dim);
  int n = static_cast<int>(a.size());
  Eigen::MatrixXd noise = spd(n, rng) * 0.5;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      ch.m(a[i], a[j]) = (i == j ? 0.7 : 0.0) + 0.3 * g(rng);
      ch.noise_cov(a[i], a[j]) = noise(i, j);
    }
  }
  return ch;
}

// KL written from the textbook formula with dense inverses.
double kl_oracle(const GaussianDist& p, const GaussianDist& q) {
  Eigen::MatrixXd qi = q.cov().inverse();
  Eigen::VectorXd d = q.mean() - p.mean();
  double k = static_cast<double>(p.dim());
  return 0.5 * ((qi * p.cov()).trace() + d.dot(qi * d) - k + std::log(q.cov().determinant() / p.cov().determinant()));
}

double log_normal(const Eigen::MatrixXd& cov, const Eigen::VectorXd& x) {
  double k = static_cast<double>(x.size());
  return -0.5 * (x.dot(cov.inverse() * x) + k * std::log(2 * M_PI) + std::log(cov.determinant()));
}

Eigen::MatrixXd block(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  Eigen::MatrixXd s(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < idx.size(); ++j) s(i, j) = m(idx[i], idx[j]);
  }
  return s;
}

}  // namespace

TEST_CASE("forward step examples") {
  auto id = forward_step(3, 0.0, 0.0);
  CHECK(id.m.isApprox(Eigen::MatrixXd::Identity(3, 3)));
  CHECK(id.noise_cov.norm() == 0.0);

  auto pure = forward_step(2, 0.0, 1.0);
  CHECK(pure.m.norm() == 0.0);
  CHECK(pure.noise_cov.isApprox(Eigen::MatrixXd::Identity(2, 2)));

  std::mt19937_64 rng(1);
  Eigen::MatrixXd s0 = spd(3, rng);
  Eigen::VectorXd mu(3);
  mu << 1, -2, 0.5;
  auto half = push(forward_step(3, 0.0, 0.5), GaussianDist(mu, s0));
  CHECK((half.mean() - 0.5 * mu).norm() < 1e-14);
  CHECK((half.cov() - (0.25 * s0 + 0.25 * Eigen::MatrixXd::Identity(3, 3))).norm() < 1e-14);

  // Two steps compose to the direct marginal at the later time.
  GaussianDist p0(mu, s0);
  auto two = push(forward_step(3, 0.3, 0.7), push(forward_step(3, 0.0, 0.3), p0));
  CHECK((two.mean() - 0.3 * mu).norm() < 1e-12);
  CHECK((two.cov() - (0.09 * s0 + 0.49 * Eigen::MatrixXd::Identity(3, 3))).norm() < 1e-12);

  CHECK_THROWS_AS(forward_step(2, 0.5, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(forward_step(2, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("push examples") {
  GaussianDist p(Eigen::VectorXd::Constant(1, 1.0), Eigen::MatrixXd::Constant(1, 1, 1.0));
  LinearChannel ch{Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 3.0)};
  auto q = push(ch, p);
  CHECK(q.mean()[0] == doctest::Approx(2.0));
  CHECK(q.cov()(0, 0) == doctest::Approx(7.0));

  auto same = push(LinearChannel::identity(1), p);
  CHECK(same.cov()(0, 0) == 1.0);

  LinearChannel collapse{Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, 4.0), Eigen::MatrixXd::Constant(1, 1, 0.5)};
  CHECK(push(collapse, p).mean()[0] == 4.0);
  CHECK(push(collapse, p).cov()(0, 0) == 0.5);

  LinearChannel degenerate{Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(1, 1)};
  CHECK_THROWS_AS(push(degenerate, p), NumericError);
  CHECK_THROWS_AS(push(LinearChannel::identity(2), p), std::invalid_argument);
}

TEST_CASE("distribution validation") {
  Eigen::Matrix2d asym;
  asym << 1, 0.5, 0.4, 1;
  CHECK_THROWS_AS(GaussianDist(Eigen::VectorXd::Zero(2), asym), std::invalid_argument);
  Eigen::Matrix2d singular;
  singular << 1, 1, 1, 1;
  CHECK_THROWS_AS(GaussianDist(Eigen::VectorXd::Zero(2), singular), std::invalid_argument);
  LinearChannel bad{Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2), -Eigen::MatrixXd::Identity(2, 2)};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("bayes reverse examples") {
  GaussianDist prior(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  LinearChannel noisy{Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)};
  auto rev = bayes_reverse(noisy, prior);
  CHECK(rev.m(0, 0) == doctest::Approx(0.5));
  CHECK(rev.b[0] == doctest::Approx(0.0));
  CHECK(rev.noise_cov(0, 0) == doctest::Approx(0.5));

  auto id = bayes_reverse(LinearChannel::identity(1), prior);
  CHECK(id.m(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(id.noise_cov(0, 0)) < 1e-9);

  Eigen::VectorXd mu(2);
  mu << 0.3, -1;
  Eigen::Matrix2d s;
  s << 2, 0.5, 0.5, 1;
  GaussianDist p2(mu, s);
  auto blind = bayes_reverse(forward_step(2, 0.0, 1.0), p2);
  CHECK(blind.m.norm() < 1e-12);
  CHECK((blind.b - mu).norm() < 1e-12);
  CHECK((blind.noise_cov - s).norm() < 1e-12);
}

TEST_CASE("bayes reverse after the channel returns the prior") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int n = 0; n < 200; ++n) {
    int dim = 1 + static_cast<int>(rng() % 5);
    Eigen::VectorXd mu(dim);
    for (auto& v : mu) v = g(rng);
    GaussianDist prior(mu, spd(dim, rng));
    std::vector<int> all(dim);
    std::iota(all.begin(), all.end(), 0);
    auto ch = random_channel_on(dim, all, rng);
    for (auto& v : ch.b) v = g(rng);
    auto back = push(bayes_reverse(ch, prior), push(ch, prior));
    CHECK((back.mean() - prior.mean()).norm() <= 1e-8);
    CHECK((back.cov() - prior.cov()).norm() <= 1e-8);
  }
}

TEST_CASE("kl examples and oracle") {
  auto n1 = [](double m, double v) {
    return GaussianDist(Eigen::VectorXd::Constant(1, m), Eigen::MatrixXd::Constant(1, 1, v));
  };
  CHECK(gaussian_kl(n1(0, 1), n1(0, 1)) == 0.0);
  CHECK(gaussian_kl(n1(0, 1), n1(1, 1)) == doctest::Approx(0.5));
  CHECK(gaussian_kl(n1(0, 2), n1(0, 1)) == doctest::Approx(0.5 * (2 - 1 + std::log(0.5))));
  CHECK(gaussian_kl(n1(0, 2), n1(0, 1)) == doctest::Approx(0.1534).epsilon(1e-3));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int n = 0; n < 100; ++n) {
    int dim = 1 + static_cast<int>(rng() % 5);
    Eigen::VectorXd m1(dim), m2(dim);
    for (int i = 0; i < dim; ++i) {
      m1[i] = g(rng);
      m2[i] = g(rng);
    }
    GaussianDist p(m1, spd(dim, rng)), q(m2, spd(dim, rng));
    CHECK(gaussian_kl(p, q) == doctest::Approx(kl_oracle(p, q)).epsilon(1e-9));
    CHECK(gaussian_kl(p, q) >= 0.0);
  }
}

TEST_CASE("cmi examples") {
  Eigen::VectorXd d(4);
  d << 1, 2, 0.5, 3;
  GaussianDist diag(Eigen::VectorXd::Zero(4), d.asDiagonal());
  CHECK(gaussian_cmi(diag, Region({0}), Region({1}), Region({2, 3})) == 0.0);

  Lattice chain(1, 8, false);
  auto g = gmrf(chain, 0.45);
  auto part = build_tripartition(chain, 3, 1, 1);
  CHECK(gaussian_cmi(g, part) <= 1e-10);
  CHECK(gaussian_cmi(g, build_tripartition(chain, 3, 2, 2)) <= 1e-10);
  CHECK(gaussian_cmi(g, build_tripartition(chain, 3, 1, 0)) > 1e-3);
}

TEST_CASE("cmi agrees with Monte Carlo over a million samples") {
  Eigen::Matrix3d prec;
  prec << 1, -0.4, -0.3, -0.4, 1, -0.4, -0.3, -0.4, 1;
  Eigen::MatrixXd cov = prec.inverse();
  GaussianDist p(Eigen::VectorXd::Zero(3), cov);
  double exact = gaussian_cmi(p, Region({0}), Region({1}), Region({2}));
  CHECK(exact > 0.0);

  // E[ln p(abc) + ln p(b) - ln p(ab) - ln p(bc)] under p.
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd cab = block(cov, {0, 1}), cbc = block(cov, {1, 2}), cb = block(cov, {1});
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  double sum = 0;
  const int n = 1000000;
  Eigen::Vector3d z;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) z[j] = g(rng);
    Eigen::Vector3d x = L * z;
    sum += log_normal(cov, x) + log_normal(cb, x.segment(1, 1)) - log_normal(cab, x.head(2)) -
           log_normal(cbc, x.tail(2));
  }
  CHECK(std::abs(sum / n - exact) <= 0.01);
}

TEST_CASE("cmi is invariant under relabeling inside each region") {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 50; ++n) {
    Eigen::MatrixXd s = spd(6, rng);
    GaussianDist p(Eigen::VectorXd::Zero(6), s);
    std::vector<int> perm{1, 0, 3, 2, 5, 4};
    if (rng() % 2) std::swap(perm[2], perm[3]);
    Eigen::MatrixXd sp(6, 6);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) sp(i, j) = s(perm[i], perm[j]);
    }
    GaussianDist q(Eigen::VectorXd::Zero(6), sp);
    double a = gaussian_cmi(p, Region({0, 1}), Region({2, 3}), Region({4, 5}));
    double b = gaussian_cmi(q, Region({0, 1}), Region({2, 3}), Region({4, 5}));
    CHECK(a == doctest::Approx(b).epsilon(1e-9));
  }
}

TEST_CASE("score examples and finite differences") {
  GaussianDist std1(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  CHECK(score(std1, Eigen::VectorXd::Constant(1, 2.0))[0] == doctest::Approx(-2.0));
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  Eigen::VectorXd mu(4);
  for (auto& v : mu) v = g(rng);
  GaussianDist p(mu, spd(4, rng));
  CHECK(score(p, mu).norm() == 0.0);
  for (int n = 0; n < 20; ++n) {
    Eigen::VectorXd x(4);
    for (auto& v : x) v = g(rng);
    Eigen::VectorXd s = score(p, x);
    Eigen::VectorXd fd(4);
    const double h = 1e-5;
    for (int i = 0; i < 4; ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd[i] = (p.log_density(xp) - p.log_density(xm)) / (2 * h);
    }
    CHECK((s - fd).norm() <= 1e-6 * std::max(1.0, s.norm()));
  }
}

TEST_CASE("markov length fit") {
  std::vector<double> rs{0, 1, 2, 3, 4}, c1, c2;
  for (double r : rs) {
    c1.push_back(std::exp(-r));
    c2.push_back(5 * std::exp(-r / 2));
  }
  auto f1 = markov_length_fit(rs, c1);
  CHECK(f1.decaying);
  CHECK(f1.xi == doctest::Approx(1.0));
  CHECK(f1.gamma == doctest::Approx(1.0));
  CHECK(f1.residual < 1e-12);
  auto f2 = markov_length_fit(rs, c2);
  CHECK(f2.xi == doctest::Approx(2.0));
  CHECK(f2.gamma == doctest::Approx(5.0));

  auto flat = markov_length_fit(rs, {1, 1, 1, 1, 1});
  CHECK_FALSE(flat.decaying);
  CHECK(std::isinf(flat.xi));
  CHECK_THROWS_AS(markov_length_fit({0, 1}, {1e-20, 1}), std::invalid_argument);

  // CMI sweep of a dense-coupling Gaussian on a chain.
  Lattice chain(1, 16, false);
  Eigen::MatrixXd prec = Eigen::MatrixXd::Identity(16, 16);
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      if (i != j) prec(i, j) = -0.3 * std::pow(0.35, std::abs(i - j) - 1);
    }
  }
  GaussianDist p(Eigen::VectorXd::Zero(16), prec.inverse());
  std::vector<double> ws, cs;
  for (int r = 0; r <= 4; ++r) {
    ws.push_back(r);
    cs.push_back(gaussian_cmi(p, build_tripartition(chain, 7, 1, r)));
  }
  auto fit = markov_length_fit(ws, cs);
  CHECK(fit.decaying);
  CHECK(std::isfinite(fit.xi));
  CHECK(fit.xi > 0);
  CHECK(std::isfinite(fit.residual));
}

TEST_CASE("local bayes reverse examples") {
  Lattice chain(1, 5, false);
  auto g = gmrf(chain, 0.45);
  auto part = build_tripartition(chain, 2, 1, 1);
  auto ch = local_forward_step(5, part.a, 0.0, 0.6);
  auto rec = push(local_bayes_reverse_from(ch, g, part), push(ch, g));
  CHECK(gaussian_kl(g, rec) <= 1e-9);

  // B covering the complement reproduces the global reversal.
  std::mt19937_64 rng(7);
  GaussianDist dense(Eigen::VectorXd::Zero(4), spd(4, rng));
  Lattice small(1, 4, false);
  auto full = build_tripartition(small, 1, 1, 3);
  REQUIRE(full.c.empty());
  auto ch2 = local_forward_step(4, full.a, 0.1, 0.5);
  auto via_local = push(local_bayes_reverse_from(ch2, dense, full), push(ch2, dense));
  auto via_global = push(bayes_reverse(ch2, dense), push(ch2, dense));
  CHECK(gaussian_kl(via_global, via_local) <= 1e-9);
  CHECK(gaussian_kl(dense, via_local) <= 1e-9);

  // Weak direct coupling between A and C.
  Eigen::Matrix3d prec;
  prec << 1, -0.4, -0.1, -0.4, 1, -0.4, -0.1, -0.4, 1;
  GaussianDist weak(Eigen::VectorXd::Zero(3), prec.inverse());
  Tripartition t3{Region({0}), Region({1}), Region({2}), 1};
  auto ch3 = local_forward_step(3, t3.a, 0.0, 0.7);
  double kl = gaussian_kl(weak, push(local_bayes_reverse_from(ch3, weak, t3), push(ch3, weak)));
  CHECK(kl > 0.0);
  CHECK(kl <= gaussian_cmi(weak, t3) + 1e-9);

  CHECK_THROWS_AS(local_bayes_reverse(ch3, weak, t3), std::invalid_argument);
}

TEST_CASE("single step recovery bounds on random instances") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int n = 0; n < 500; ++n) {
    auto rp = random_partition(8, rng);
    int dim = rp.lat.size();
    Eigen::VectorXd mu(dim);
    for (auto& v : mu) v = g(rng);
    GaussianDist p(mu, spd(dim, rng));
    auto ch = random_channel_on(dim, rp.part.a.sites(), rng);
    auto q = push(ch, p);
    auto rec = push(local_bayes_reverse_from(ch, p, rp.part), q);
    double kl = kl_oracle(p, rec);
    double before = gaussian_cmi(p, rp.part);
    double after = gaussian_cmi(q, rp.part);
    CHECK(kl >= -1e-12);
    CHECK(kl <= before + 1e-9);
    CHECK(kl <= before - after + 1e-9);
  }
  for (const auto& rep : gaussian_recovery_suite(100, 9)) {
    CHECK_MESSAGE(rep.violations == 0, rep.name);
    CHECK(rep.instances == 100);
  }
}

TEST_CASE("gmrf structure") {
  Lattice grid(2, 4, true);
  auto g = gmrf(grid, 0.2);
  Eigen::MatrixXd prec = g.cov().inverse();
  CHECK(prec(0, 0) == doctest::Approx(1.0));
  CHECK(prec(0, 1) == doctest::Approx(-0.2));
  CHECK(prec(0, 4) == doctest::Approx(-0.2));
  CHECK(std::abs(prec(0, 5)) < 1e-10);
  CHECK_THROWS_AS(gmrf(Lattice(1, 8, true), 0.6), std::invalid_argument);
}

TEST_CASE("multi step local recovery") {
  SUBCASE("buffer covering the lattice is exact") {
    Lattice chain(1, 8, false);
    auto res = multi_step_local_recovery(gmrf(chain, 0.4), chain, 4, 8);
    CHECK(res.kl <= 1e-8);
  }
  SUBCASE("product start is exact at r = 0") {
    Lattice chain(1, 6, false);
    Eigen::VectorXd v(6);
    v << 1, 2, 0.5, 1.5, 3, 0.7;
    GaussianDist p(Eigen::VectorXd::Zero(6), v.asDiagonal());
    auto res = multi_step_local_recovery(p, chain, 5, 0);
    CHECK(res.kl <= 1e-8);
    CHECK(res.max_cmi <= 1e-10);
  }
  SUBCASE("error decays with the buffer width") {
    Lattice chain(1, 16, false);
    auto p0 = gmrf(chain, 0.4);
    std::vector<double> rs, kls;
    for (int r = 0; r <= 4; ++r) {
      auto res = multi_step_local_recovery(p0, chain, 8, r);
      rs.push_back(r);
      kls.push_back(res.kl);
    }
    for (std::size_t i = 1; i < kls.size(); ++i) CHECK(kls[i] < kls[i - 1]);
    CHECK(kls[4] * 100 <= kls[0]);
    auto fit = markov_length_fit(rs, kls);
    CHECK(fit.slope < 0);
  }
  CHECK_THROWS_AS(multi_step_local_recovery(gmrf(Lattice(1, 4, false), 0.3), Lattice(1, 5, false), 2, 1),
                  std::invalid_argument);
}
