#include "ldm/scorefield.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ldm/errors.hpp"
#include "ldm/seed.hpp"

namespace ldm {

namespace {

constexpr double kFlush = 1e-300;
constexpr double kDiverged = 1e6;

void check_time(double t) {
  if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("score time must lie in (0, 1]");
}

void check_point(const Dataset& ds, const Eigen::VectorXd& x) {
  if (x.size() != ds.dim()) throw std::invalid_argument("query point has the wrong dimension");
}

// Softmax of the component log-likelihoods over the listed coordinates,
// coordinate j observed at time alpha[j]. Also returns log-sum-exp of the
// unnormalized terms -|x - c|^2 / (2 alpha^2).
Eigen::VectorXd weights_on(const Dataset& ds, const std::vector<int>& coords, const Eigen::VectorXd& alpha,
                           const Eigen::VectorXd& x, double* lse = nullptr) {
  const auto& X = ds.samples();
  Eigen::VectorXd logit(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double acc = 0.0;
    for (int j : coords) {
      const double a = alpha[j];
      const double d = x[j] - (1.0 - a) * X(i, j);
      acc += d * d / (2.0 * a * a);
    }
    logit[i] = -acc;
  }
  const double mx = logit.maxCoeff();
  Eigen::VectorXd w = (logit.array() - mx).exp();
  const double z = w.sum();
  if (lse) *lse = mx + std::log(z);
  w /= z;
  for (auto& v : w) {
    if (v < kFlush) v = 0.0;
  }
  return w / w.sum();
}

std::vector<int> all_coords(const Dataset& ds) {
  std::vector<int> c(ds.dim());
  for (int j = 0; j < ds.dim(); ++j) c[j] = j;
  return c;
}

bool in_global_interval(const SamplerConfig& cfg, double t) {
  for (const auto& [lo, hi] : cfg.global_intervals) {
    if (t >= lo && t <= hi) return true;
  }
  return false;
}

struct Patch {
  std::vector<int> a;
  std::vector<int> ab;
};

}  // namespace

Dataset::Dataset(Eigen::MatrixXd samples) : Dataset(samples, Lattice(1, std::max<Eigen::Index>(1, samples.cols()), false)) {}

Dataset::Dataset(Eigen::MatrixXd samples, Lattice lat) : x_(std::move(samples)), lat_(lat) {
  if (x_.rows() < 1) throw std::invalid_argument("dataset needs at least one sample");
  if (x_.cols() < 1) throw std::invalid_argument("dataset needs at least one coordinate");
  if (!x_.allFinite()) throw std::invalid_argument("dataset has non-finite entries");
  if (lat_.size() != x_.cols()) throw std::invalid_argument("dataset width does not match its lattice");
}

void NoiseSchedule::validate() const {
  if (steps < 1) throw std::invalid_argument("schedule needs at least one step");
  if (!(t_min > 0.0 && t_min < t_max && t_max <= 1.0)) {
    throw std::invalid_argument("schedule needs 0 < t_min < t_max <= 1");
  }
}

void SamplerConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be a finite number >= 0");
  if (r < 0) throw std::invalid_argument("buffer width r must be nonnegative");
  if (k < 1) throw std::invalid_argument("block size k must be positive");
  if (draws < 1) throw std::invalid_argument("draws must be positive");
  auto iv = global_intervals;
  std::sort(iv.begin(), iv.end());
  for (std::size_t i = 0; i < iv.size(); ++i) {
    if (!(iv[i].first >= 0.0 && iv[i].first <= iv[i].second && iv[i].second <= 1.0)) {
      throw std::invalid_argument("global intervals must satisfy 0 <= lo <= hi <= 1");
    }
    if (i > 0 && iv[i].first <= iv[i - 1].second) throw std::invalid_argument("global intervals overlap");
  }
}

Eigen::VectorXd mixture_weights(const Dataset& ds, double t, const Eigen::VectorXd& x) {
  check_time(t);
  check_point(ds, x);
  return weights_on(ds, all_coords(ds), Eigen::VectorXd::Constant(ds.dim(), NoiseSchedule::alpha(t)), x);
}

double mixture_log_density(const Dataset& ds, double t, const Eigen::VectorXd& x) {
  check_time(t);
  check_point(ds, x);
  const double a = NoiseSchedule::alpha(t);
  double lse = 0.0;
  weights_on(ds, all_coords(ds), Eigen::VectorXd::Constant(ds.dim(), a), x, &lse);
  const double k = static_cast<double>(ds.dim());
  return lse - std::log(static_cast<double>(ds.size())) - 0.5 * k * std::log(2.0 * M_PI * a * a);
}

Eigen::VectorXd mixture_score(const Dataset& ds, double t, const Eigen::VectorXd& x) {
  const Eigen::VectorXd w = mixture_weights(ds, t, x);
  const double a = NoiseSchedule::alpha(t);
  const Eigen::VectorXd mean = (1.0 - a) * (ds.samples().transpose() * w);
  return (mean - x) / (a * a);
}

Eigen::VectorXd local_mixture_score(const Dataset& ds, double t, const Eigen::VectorXd& x, const Tripartition& part) {
  check_time(t);
  check_point(ds, x);
  std::vector<int> ab(part.a.begin(), part.a.end());
  ab.insert(ab.end(), part.b.begin(), part.b.end());
  for (int j : ab) {
    if (j >= ds.dim()) throw std::invalid_argument("tripartition site outside the dataset");
  }
  const double a = NoiseSchedule::alpha(t);
  const Eigen::VectorXd w = weights_on(ds, ab, Eigen::VectorXd::Constant(ds.dim(), a), x);
  Eigen::VectorXd s(part.a.size());
  Eigen::Index i = 0;
  for (int j : part.a) {
    const double mean = (1.0 - a) * ds.samples().col(j).dot(w);
    s[i++] = (mean - x[j]) / (a * a);
  }
  return s;
}

Eigen::VectorXd flow_velocity(const Dataset& ds, double t, const Eigen::VectorXd& x) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("flow_velocity needs 0 < t < 1");
  const Eigen::VectorXd w = mixture_weights(ds, t, x);
  const Eigen::VectorXd x0 = ds.samples().transpose() * w;
  return (x0 - x) / NoiseSchedule::alpha(t);
}

Eigen::MatrixXd sample_backward(const Dataset& ds, const NoiseSchedule& schedule, const SamplerConfig& cfg) {
  schedule.validate();
  cfg.validate();
  const Eigen::Index K = ds.dim();
  const auto& X = ds.samples();
  const std::vector<int> every = all_coords(ds);

  std::vector<Patch> patches;
  if (cfg.mode != SamplerMode::global) {
    const ReorgSchedule reorg = reorganize(ds.lattice(), std::min(cfg.k, ds.lattice().length()), cfg.r);
    // Forward order is sub-step by sub-step; the backward sweep reverses it.
    for (auto sub = reorg.substeps.rbegin(); sub != reorg.substeps.rend(); ++sub) {
      for (const auto& region : *sub) {
        const Tripartition part = tripartition_around(ds.lattice(), region, cfg.r);
        Patch p{region.sites(), region.sites()};
        p.ab.insert(p.ab.end(), part.b.begin(), part.b.end());
        patches.push_back(std::move(p));
      }
    }
  }
  auto use_global = [&](double t) {
    if (cfg.mode == SamplerMode::global) return true;
    if (cfg.mode == SamplerMode::local) return false;
    return in_global_interval(cfg, t);
  };

  // Moves coordinate j from time t to s along the bridge towards x0.
  auto bridge = [&](double& xj, double x0, double t, double s, double noise) {
    const double at = NoiseSchedule::alpha(t);
    const double as = NoiseSchedule::alpha(s);
    const double z = (xj - (1.0 - at) * x0) / at;
    double sigma = 0.0;
    if (cfg.eta > 0.0) {
      const double a = (1.0 - at) / (1.0 - as);
      const double q = at * at - a * a * as * as;
      sigma = std::min(as, cfg.eta * as * std::sqrt(std::max(q, 0.0)) / at);
    }
    xj = (1.0 - as) * x0 + std::sqrt(std::max(as * as - sigma * sigma, 0.0)) * z + sigma * noise;
  };

  Eigen::MatrixXd out(cfg.draws, K);
  for (int draw = 0; draw < cfg.draws; ++draw) {
    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(draw)));
    std::normal_distribution<double> normal;
    Eigen::VectorXd x(K);
    for (Eigen::Index j = 0; j < K; ++j) x[j] = normal(rng);
    if (schedule.t_max < 1.0) {
      std::uniform_int_distribution<Eigen::Index> pick(0, X.rows() - 1);
      const double a = NoiseSchedule::alpha(schedule.t_max);
      x = (1.0 - a) * X.row(pick(rng)).transpose() + a * x;
    }
    Eigen::VectorXd alpha = Eigen::VectorXd::Constant(K, NoiseSchedule::alpha(schedule.t_max));
    Eigen::VectorXd noise(K);

    const double dt = (schedule.t_max - schedule.t_min) / schedule.steps;
    for (int n = 0; n < schedule.steps; ++n) {
      const double t = schedule.t_max - n * dt;
      const double s = n + 1 == schedule.steps ? schedule.t_min : t - dt;
      for (Eigen::Index j = 0; j < K; ++j) noise[j] = normal(rng);
      if (use_global(0.5 * (t + s))) {
        const Eigen::VectorXd w = weights_on(ds, every, alpha, x);
        const Eigen::VectorXd x0 = X.transpose() * w;
        for (Eigen::Index j = 0; j < K; ++j) bridge(x[j], x0[j], t, s, noise[j]);
        alpha.setConstant(NoiseSchedule::alpha(s));
      } else {
        for (const auto& p : patches) {
          const Eigen::VectorXd w = weights_on(ds, p.ab, alpha, x);
          for (int j : p.a) bridge(x[j], X.col(j).dot(w), t, s, noise[j]);
          for (int j : p.a) alpha[j] = NoiseSchedule::alpha(s);
        }
      }
      if (!x.allFinite() || x.norm() > kDiverged) {
        std::ostringstream os;
        os << "sampler diverged at step " << n << " (t = " << t << ", draw " << draw << ", |x| = " << x.norm() << ")";
        throw NumericError(os.str());
      }
    }

    if (cfg.denoise_final) {
      if (use_global(schedule.t_min)) {
        x = X.transpose() * weights_on(ds, every, alpha, x);
      } else {
        Eigen::VectorXd x0 = x;
        for (const auto& p : patches) {
          const Eigen::VectorXd w = weights_on(ds, p.ab, alpha, x);
          for (int j : p.a) x0[j] = X.col(j).dot(w);
        }
        x = x0;
      }
    }
    out.row(draw) = x.transpose();
  }
  return out;
}

}  // namespace ldm
