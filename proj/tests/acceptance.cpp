// One PASS/FAIL line per acceptance criterion; nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ldm/discrete.hpp"
#include "ldm/gaussian.hpp"
#include "ldm/infotools.hpp"
#include "ldm/lattice.hpp"
#include "ldm/mine.hpp"
#include "ldm/properties.hpp"
#include "ldm/scorefield.hpp"
#include "ldm/toric.hpp"

using namespace ldm;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool in_time = secs < budget_s;
  bool ok = out.ok && in_time;
  if (!ok) ++failures;
  std::printf("%s %2d %-28s %s (%.2f s, budget %.0f s)\n", ok ? "PASS" : "FAIL", id, name.c_str(), out.detail.c_str(),
              secs, budget_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const SuiteReport& find(const std::vector<SuiteReport>& reps, const std::string& name) {
  return *std::find_if(reps.begin(), reps.end(), [&](const SuiteReport& r) { return r.name == name; });
}

Region all_sites(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return Region(v);
}

Eigen::MatrixXd gaussian_rows(const Eigen::Matrix2d& cov, int n, std::uint64_t seed) {
  Eigen::Matrix2d L = cov.llt().matrixL();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd z(n, 2);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = g(rng);
  return z * L.transpose();
}

}  // namespace

int main() {
  criterion(1, "exact bayes reversal", 30, [] {
    std::mt19937_64 rng(101);
    double worst = 0;
    for (int n = 0; n < 200; ++n) {
      int bits = 1 + static_cast<int>(rng() % 10);
      auto p = random_dist(bits, rng);
      int na = 1 + static_cast<int>(rng() % std::min(bits, 4));
      std::vector<int> a;
      for (int i = 0; i < bits && static_cast<int>(a.size()) < na; ++i) {
        if (rng() % 2 || bits - i <= na - static_cast<int>(a.size())) a.push_back(i);
      }
      auto ch = random_local_channel(Region(a), rng);
      worst = std::max(worst, tv(apply(bayes_channel(ch, p), apply(ch, p)), p));
    }
    return Outcome{worst <= 1e-10, fmt("max TV %.3g over 200 instances", worst)};
  });

  std::vector<SuiteReport> discrete;
  criterion(2, "recovery chain 2TV^2<=KL<=CMI", 120, [&] {
    discrete = discrete_recovery_suite(1000, 202);
    const auto& p = find(discrete, "pinsker");
    const auto& r = find(discrete, "recovery");
    bool ok = p.instances == 1000 && r.instances == 1000 && p.violations == 0 && r.violations == 0;
    return Outcome{ok, "violations " + std::to_string(p.violations) + "+" + std::to_string(r.violations) +
                           " of 1000" + fmt(", worst KL-CMI %.3g", r.worst_excess)};
  });

  criterion(3, "cmi-difference bound", 120, [&] {
    if (discrete.empty()) discrete = discrete_recovery_suite(1000, 202);
    const auto& c = find(discrete, "cmi-difference");
    return Outcome{c.instances == 1000 && c.violations == 0,
                   "violations " + std::to_string(c.violations) + " of 1000" + fmt(", worst %.3g", c.worst_excess)};
  });

  criterion(4, "telescoping TV bound", 60, [] {
    std::mt19937_64 rng(404);
    int violations = 0;
    for (int n = 0; n < 50; ++n) {
      Lattice lat = rng() % 3 == 0 ? Lattice(2, 2, rng() % 2) : Lattice(1, 2 + static_cast<int>(rng() % 7), rng() % 2);
      auto p0 = random_dist(lat.size(), rng);
      int steps = 1 + static_cast<int>(rng() % 6);
      std::uniform_real_distribution<double> u(0.01, 0.4);
      std::vector<double> ps(steps);
      for (auto& v : ps) v = u(rng);
      auto res = local_recovery_chain(p0, lat, ps, 1, static_cast<int>(rng() % 3));
      double total = tv(res.recovered, p0);
      double bound = 0;
      for (double v : res.channel_tv) bound += v;
      if (total > bound + 1e-12) ++violations;
    }
    return Outcome{violations == 0, "violations " + std::to_string(violations) + " of 50"};
  });

  criterion(5, "toric code", 300, [] {
    std::vector<std::string> bad;
    TorusCode c2(2), c3(3);
    auto support = [](const FiniteDist& p) {
      return std::count_if(p.probs().begin(), p.probs().end(), [](double v) { return v > 0; });
    };
    auto loops3 = loop_dist(c3);
    if (support(loop_dist(c2)) != 8) bad.push_back("L=2 support");
    if (support(loops3) != 256) bad.push_back("L=3 support");

    auto part = edge_tripartition(c3, Region({central_edge(c3)}), 1);
    std::vector<double> ps;
    for (int i = 0; i <= 20; ++i) ps.push_back(i / 40.0);
    auto rows = toric_cmi_sweep(c3, ps, part);
    if (rows.front().cmi > 1e-9 || rows.back().cmi > 1e-9) bad.push_back("endpoint cmi");
    auto peak = std::max_element(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.cmi < b.cmi; });
    if (!(peak->cmi > std::max(rows.front().cmi, rows.back().cmi) + 1e-6)) bad.push_back("no interior maximum");

    std::mt19937_64 rng(505);
    double worst = 0;
    Region edges = all_sites(c3.edges());
    for (int n = 0; n < 20; ++n) {
      std::vector<int> q;
      for (int e = 0; e < c3.edges(); ++e) {
        if (rng() % 3 == 0) q.push_back(e);
      }
      if (q.empty()) q.push_back(static_cast<int>(rng() % c3.edges()));
      double p = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
      double ref = entropy(apply_flip(FlipChannel(p, edges), loops3).marginal(q));
      worst = std::max(worst, std::abs(regional_entropy_via_anyons(c3, Region(q), p) - ref));
    }
    if (worst > 1e-9) bad.push_back("anyon entropy");

    double flip_tv = 0;
    for (const TorusCode* c : {&c2, &c3}) {
      auto ch = bypass_path_channels(*c);
      auto zero = FiniteDist::point(c->edges(), 0);
      flip_tv = std::max(flip_tv, tv(ldm::apply(std::span<const LocalChannel>(ch.star_flip), zero), loop_dist(*c)));
    }
    if (flip_tv > 1e-12) bad.push_back("flip channel");

    std::string detail = fmt("peak %.4g", peak->cmi) + fmt(" at p=%.3g", peak->p) + fmt(", anyon err %.2g", worst) +
                         fmt(", flip TV %.2g", flip_tv);
    for (const auto& b : bad) detail += "; failed: " + b;
    return Outcome{bad.empty(), detail};
  });

  criterion(6, "gaussian recovery trend", 60, [] {
    Lattice chain(1, 16, false);
    auto p0 = gmrf(chain, 0.4);
    std::vector<double> rs, kls;
    for (int r = 0; r <= 4; ++r) {
      rs.push_back(r);
      kls.push_back(multi_step_local_recovery(p0, chain, 8, r).kl);
    }
    double full = multi_step_local_recovery(p0, chain, 8, 16).kl;
    auto fit = markov_length_fit(rs, kls);
    bool ok = kls[4] * 100 <= kls[0] && fit.slope < 0 && full <= 1e-8;
    return Outcome{ok, fmt("KL r=0 %.3g", kls[0]) + fmt(", r=4 %.3g", kls[4]) + fmt(", slope %.3g", fit.slope) +
                           fmt(", full %.2g", full)};
  });

  criterion(7, "score correctness", 30, [] {
    std::mt19937_64 rng(707);
    std::normal_distribution<double> g;
    Eigen::MatrixXd pts(5, 2);
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = g(rng);
    Dataset ds(pts);
    auto logp = [&](double t, const Eigen::VectorXd& x) {
      double s = 0;
      for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        s += std::exp(-(x - (1 - t) * pts.row(i).transpose()).squaredNorm() / (2 * t * t));
      }
      return std::log(s);
    };
    double worst_fd = 0, worst_id = 0;
    const double h = 1e-5;
    for (int n = 0; n < 100; ++n) {
      double t = std::uniform_real_distribution<double>(0.2, 0.9)(rng);
      Eigen::VectorXd x(2);
      x << g(rng), g(rng);
      Eigen::VectorXd s = mixture_score(ds, t, x);
      Eigen::VectorXd fd(2);
      for (int i = 0; i < 2; ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        fd[i] = (logp(t, xp) - logp(t, xm)) / (2 * h);
      }
      worst_fd = std::max(worst_fd, (s - fd).norm() / std::max(1.0, s.norm()));
      Eigen::VectorXd v = (x + t * s) / (1 - t);
      worst_id = std::max(worst_id, (flow_velocity(ds, t, x) - v).norm());
    }
    return Outcome{worst_fd <= 1e-5 && worst_id <= 1e-8,
                   fmt("FD rel err %.2g", worst_fd) + fmt(", velocity identity %.2g", worst_id)};
  });

  criterion(8, "two-point sampler", 30, [] {
    Eigen::MatrixXd pts(2, 2);
    pts << 1, 0, -1, 0;
    SamplerConfig cfg;
    cfg.draws = 1000;
    cfg.seed = 808;
    NoiseSchedule sch;
    sch.steps = 200;
    auto out = sample_backward(Dataset(pts), sch, cfg);
    int near = 0, right = 0;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      Eigen::Vector2d x = out.row(i).transpose();
      if (std::min((x - Eigen::Vector2d(1, 0)).norm(), (x - Eigen::Vector2d(-1, 0)).norm()) <= 0.1) ++near;
      if (x[0] > 0) ++right;
    }
    bool ok = near >= 950 && std::abs(right - 500) <= 3 * std::sqrt(250.0);
    return Outcome{ok, std::to_string(near) + "/1000 within 0.1, split " + std::to_string(right) + "/" +
                           std::to_string(1000 - right)};
  });

  criterion(9, "mine estimator", 240, [] {
    Eigen::Matrix2d cov;
    cov << 1, 0.8, 0.8, 1;
    MineConfig cfg;
    cfg.batch = 256;
    cfg.iterations = 20000;
    cfg.seed = 909;
    auto x = gaussian_rows(cov, 20000, 910);
    auto t0 = std::chrono::steady_clock::now();
    double dep = mine_estimate(PairedSamples{x.col(0), x.col(1)}, cfg).estimate;
    double t_dep = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto y = gaussian_rows(Eigen::Matrix2d::Identity(), 20000, 911);
    t0 = std::chrono::steady_clock::now();
    double ind = mine_estimate(PairedSamples{y.col(0), y.col(1)}, cfg).estimate;
    double t_ind = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = dep >= 0.43 && dep <= 0.59 && std::abs(ind) <= 0.05 && t_dep < 120 && t_ind < 120;
    return Outcome{ok, fmt("rho=0.8 %.4f", dep) + fmt(" (exact %.4f)", -0.5 * std::log(1 - 0.64)) +
                           fmt(", independent %.4f", ind) + fmt(", %.0f s per run", std::max(t_dep, t_ind))};
  });

  criterion(10, "reorganization", 60, [] {
    std::mt19937_64 rng(1010);
    int violations = 0;
    for (int n = 0; n < 50; ++n) {
      int dim = 1 + static_cast<int>(rng() % 2);
      int L = dim == 1 ? 1 + static_cast<int>(rng() % 40) : 1 + static_cast<int>(rng() % 14);
      int k = 1 + static_cast<int>(rng() % std::min(L, 3));
      int r = static_cast<int>(rng() % 4);
      Lattice lat(dim, L, rng() % 2);
      auto s = reorganize(lat, k, r);
      std::vector<int> count(lat.size(), 0);
      bool ok = true;
      for (const auto& step : s.substeps) {
        for (const auto& reg : step) {
          for (int site : reg) ++count[site];
        }
        for (std::size_t i = 0; i < step.size(); ++i) {
          for (std::size_t j = i + 1; j < step.size(); ++j) {
            for (int a : step[i]) {
              for (int b : step[j]) ok = ok && lat.distance(a, b) >= 2 * r;
            }
          }
        }
      }
      ok = ok && std::all_of(count.begin(), count.end(), [](int c) { return c == 1; });
      if (!ok) ++violations;
    }
    return Outcome{violations == 0, "violations " + std::to_string(violations) + " of 50"};
  });

  criterion(11, "master equation", 60, [] {
    double worst = 0;
    for (double t : {0.1, 0.5, 1.0, 2.0, 4.0}) {
      auto p = integrate_master([](double) { return RateGenerator::flips(1, Region({0}), 0.5); },
                                FiniteDist::point(1, 0), t, 400);
      worst = std::max({worst, std::abs(p[0] - (1 + std::exp(-t)) / 2), std::abs(p[1] - (1 - std::exp(-t)) / 2)});
    }
    std::mt19937_64 rng(1111);
    std::exponential_distribution<double> ex;
    std::vector<double> w(16);
    for (auto& v : w) v = 0.05 + ex(rng);
    auto q0 = FiniteDist::from_weights(4, w);
    Region all = all_sites(4);
    const double T = 1.0;
    auto qt = integrate_master([&](double) { return RateGenerator::flips(4, all, 0.5); }, q0, T, 400);
    auto back = integrate_master(
        [&](double s) {
          auto ps = apply_flip(FlipChannel((1 - std::exp(-(T - s))) / 2, all), q0);
          return reverse_rates(RateGenerator::flips(4, all, 0.5), ps);
        },
        qt, T, 400);
    double round = tv(back, q0);
    return Outcome{worst <= 1e-8 && round <= 1e-6, fmt("closed form err %.2g", worst) + fmt(", round trip TV %.2g", round)};
  });

  std::printf("%s: %d failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
