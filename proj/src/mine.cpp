#include "ldm/mine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ldm/errors.hpp"

namespace ldm {

void MineConfig::validate() const {
  if (batch < 2) throw std::invalid_argument("MINE batch size must be at least 2");
  if (!(learning_rate > 0.0 && learning_rate < 1.0)) {
    throw std::invalid_argument("MINE learning rate must lie in (0, 1)");
  }
  if (!(ema_rate > 0.0 && ema_rate < 1.0)) throw std::invalid_argument("MINE ema rate must lie in (0, 1)");
  if (iterations < 1) throw std::invalid_argument("MINE needs at least one iteration");
  if (hidden < 1) throw std::invalid_argument("MINE hidden width must be positive");
  if (eval_shuffles < 1) throw std::invalid_argument("MINE eval_shuffles must be positive");
}

struct Mlp::Views {
  Eigen::Map<const Eigen::MatrixXd> w1;
  Eigen::Map<const Eigen::VectorXd> b1;
  Eigen::Map<const Eigen::MatrixXd> w2;
  Eigen::Map<const Eigen::VectorXd> b2;
  Eigen::Map<const Eigen::RowVectorXd> w3;
  double b3;
};

namespace {

Eigen::Index param_count(int in, int h) {
  return static_cast<Eigen::Index>(h) * in + h + static_cast<Eigen::Index>(h) * h + h + h + 1;
}

// Returns silu(z) and stores sigmoid(z) in sig.
Eigen::MatrixXd silu(const Eigen::MatrixXd& z, Eigen::MatrixXd& sig) {
  sig = (1.0 + (-z.array()).exp()).inverse().matrix();
  return z.cwiseProduct(sig);
}

// d silu / dz from z and sigmoid(z).
Eigen::MatrixXd silu_grad(const Eigen::MatrixXd& z, const Eigen::MatrixXd& sig) {
  return (sig.array() * (1.0 + z.array() * (1.0 - sig.array()))).matrix();
}

}  // namespace

Mlp::Mlp(int input, int hidden, std::uint64_t seed) : input_(input), hidden_(hidden) {
  if (input < 1 || hidden < 1) throw std::invalid_argument("Mlp: dimensions must be positive");
  theta_ = Eigen::VectorXd::Zero(param_count(input, hidden));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Index off = 0;
  auto fill = [&](Eigen::Index n, double scale) {
    for (Eigen::Index i = 0; i < n; ++i) theta_[off + i] = scale * gauss(rng);
    off += n;
  };
  fill(static_cast<Eigen::Index>(hidden) * input, std::sqrt(1.0 / input));
  off += hidden;
  fill(static_cast<Eigen::Index>(hidden) * hidden, std::sqrt(1.0 / hidden));
  off += hidden;
  fill(hidden, std::sqrt(1.0 / hidden));
}

Mlp::Views Mlp::views() const {
  const double* p = theta_.data();
  const Eigen::Index h = hidden_;
  const Eigen::Index in = input_;
  return Views{Eigen::Map<const Eigen::MatrixXd>(p, h, in),
               Eigen::Map<const Eigen::VectorXd>(p + h * in, h),
               Eigen::Map<const Eigen::MatrixXd>(p + h * in + h, h, h),
               Eigen::Map<const Eigen::VectorXd>(p + h * in + h + h * h, h),
               Eigen::Map<const Eigen::RowVectorXd>(p + h * in + 2 * h + h * h, h),
               p[h * in + 3 * h + h * h]};
}

Mlp::Pass Mlp::run(const Eigen::MatrixXd& x) const {
  auto v = views();
  Pass p;
  p.z1 = (v.w1 * x).colwise() + v.b1;
  p.h1 = silu(p.z1, p.s1);
  p.z2 = (v.w2 * p.h1).colwise() + v.b2;
  p.h2 = silu(p.z2, p.s2);
  p.out = v.w3 * p.h2;
  p.out.array() += v.b3;
  return p;
}

Eigen::RowVectorXd Mlp::forward(const Eigen::MatrixXd& x) const { return run(x).out; }

Eigen::VectorXd Mlp::backward(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& grad_out) const {
  return gradient(x, run(x), grad_out);
}

Eigen::VectorXd Mlp::gradient(const Eigen::MatrixXd& x, const Pass& pass, const Eigen::RowVectorXd& grad_out) const {
  auto v = views();
  const Eigen::Index h = hidden_;
  const Eigen::Index in = input_;
  Eigen::VectorXd g(theta_.size());
  double* p = g.data();
  Eigen::Map<Eigen::MatrixXd> gw1(p, h, in);
  Eigen::Map<Eigen::VectorXd> gb1(p + h * in, h);
  Eigen::Map<Eigen::MatrixXd> gw2(p + h * in + h, h, h);
  Eigen::Map<Eigen::VectorXd> gb2(p + h * in + h + h * h, h);
  Eigen::Map<Eigen::RowVectorXd> gw3(p + h * in + 2 * h + h * h, h);

  gw3.noalias() = grad_out * pass.h2.transpose();
  p[h * in + 3 * h + h * h] = grad_out.sum();
  Eigen::MatrixXd gz2 = (v.w3.transpose() * grad_out).cwiseProduct(silu_grad(pass.z2, pass.s2));
  gw2.noalias() = gz2 * pass.h1.transpose();
  gb2 = gz2.rowwise().sum();
  Eigen::MatrixXd gz1 = (v.w2.transpose() * gz2).cwiseProduct(silu_grad(pass.z1, pass.s1));
  gw1.noalias() = gz1 * x.transpose();
  gb1 = gz1.rowwise().sum();
  return g;
}

namespace {

struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd inv_std;

  explicit Standardizer(const Eigen::MatrixXd& m) {
    mean = m.colwise().mean();
    inv_std = Eigen::RowVectorXd::Zero(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double var = (m.col(j).array() - mean[j]).square().mean();
      // Constant columns (e.g. zero padding) pass through as zeros.
      inv_std[j] = var > 1e-24 ? 1.0 / std::sqrt(var) : 0.0;
    }
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& m) const {
    return ((m.rowwise() - mean).array().rowwise() * inv_std.array()).matrix();
  }
};

double log_mean_exp(const Eigen::RowVectorXd& t) {
  double mx = t.maxCoeff();
  return mx + std::log((t.array() - mx).exp().mean());
}

}  // namespace

MineResult mine_estimate(const PairedSamples& samples, const MineConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = samples.size();
  if (samples.s.rows() != n) throw std::invalid_argument("mine_estimate: a and s row counts differ");
  if (n < cfg.batch) {
    throw std::invalid_argument("mine_estimate: " + std::to_string(n) + " samples is fewer than the batch size " +
                                std::to_string(cfg.batch));
  }
  if (samples.a.cols() < 1 || samples.s.cols() < 1) {
    throw std::invalid_argument("mine_estimate: both sides need at least one column");
  }
  const Eigen::Index da = samples.a.cols();
  const Eigen::Index ds = samples.s.cols();
  const Eigen::MatrixXd a = Standardizer(samples.a).apply(samples.a);
  const Eigen::MatrixXd s = Standardizer(samples.s).apply(samples.s);

  std::mt19937_64 rng(cfg.seed);
  Mlp net(static_cast<int>(da + ds), cfg.hidden, rng());

  const Eigen::Index np = net.params().size();
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(np);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(np);
  const double beta1 = 0.9;
  const double beta2 = 0.999;
  const double adam_eps = 1e-8;

  const int b = cfg.batch;
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::vector<Eigen::Index> idx(b);
  std::vector<int> perm(b);
  // Columns [0, b) hold joint pairs, [b, 2b) the permuted marginal pairs.
  Eigen::MatrixXd x(da + ds, 2 * b);
  Eigen::RowVectorXd grad_out(2 * b);

  double ema_exp = -1.0;
  double batch_avg = 0.0;
  MineResult res;
  for (int it = 1; it <= cfg.iterations; ++it) {
    for (int i = 0; i < b; ++i) idx[i] = pick(rng);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < b; ++i) {
      x.col(i).head(da) = a.row(idx[i]).transpose();
      x.col(i).tail(ds) = s.row(idx[i]).transpose();
      x.col(b + i).head(da) = a.row(idx[i]).transpose();
      x.col(b + i).tail(ds) = s.row(idx[perm[i]]).transpose();
    }
    const Mlp::Pass pass = net.run(x);
    const Eigen::RowVectorXd& t = pass.out;
    Eigen::RowVectorXd tj = t.head(b);
    Eigen::RowVectorXd tm = t.tail(b);
    Eigen::RowVectorXd et = tm.array().exp();
    const double mean_et = et.mean();
    const double bound = tj.mean() - std::log(mean_et);
    if (!std::isfinite(bound) || !std::isfinite(mean_et)) {
      std::ostringstream os;
      os << "MINE: non-finite objective at iteration " << it << " (mean T_joint=" << tj.mean()
         << ", mean e^T_marg=" << mean_et << ")";
      throw NumericError(os.str());
    }
    ema_exp = ema_exp < 0.0 ? mean_et : (1.0 - cfg.ema_rate) * ema_exp + cfg.ema_rate * mean_et;
    batch_avg = it == 1 ? bound : (1.0 - 0.01) * batch_avg + 0.01 * bound;

    // Minimize -(mean T_j - mean(e^T_m) / ema): the moving average replaces
    // the batch denominator in the log-partition gradient.
    grad_out.head(b).setConstant(-1.0 / b);
    grad_out.tail(b) = et / (ema_exp * b);
    Eigen::VectorXd g = net.gradient(x, pass, grad_out);

    m1 = beta1 * m1 + (1.0 - beta1) * g;
    m2 = beta2 * m2 + (1.0 - beta2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(beta1, it);
    const double c2 = 1.0 - std::pow(beta2, it);
    net.params().array() -= cfg.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + adam_eps);
  }

  // Final evaluation on every sample, pooling several shuffles of s.
  Eigen::MatrixXd joint(da + ds, n);
  joint.topRows(da) = a.transpose();
  joint.bottomRows(ds) = s.transpose();
  const double mean_tj = net.forward(joint).mean();
  std::vector<Eigen::Index> order(n);
  Eigen::RowVectorXd tm_all(n * cfg.eval_shuffles);
  Eigen::MatrixXd marg(da + ds, n);
  marg.topRows(da) = a.transpose();
  for (int sh = 0; sh < cfg.eval_shuffles; ++sh) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index i = 0; i < n; ++i) marg.col(i).tail(ds) = s.row(order[i]).transpose();
    tm_all.segment(sh * n, n) = net.forward(marg);
  }
  res.estimate = mean_tj - log_mean_exp(tm_all);
  if (!std::isfinite(res.estimate)) throw NumericError("MINE: non-finite final estimate");
  res.batch_average = batch_avg;
  res.iterations = cfg.iterations;
  return res;
}

MineCmiResult cmi_via_mine(const CmiSamples& samples, const MineConfig& cfg, bool zero_pad) {
  const Eigen::Index n = samples.a.rows();
  if (samples.b.rows() != n || samples.c.rows() != n) {
    throw std::invalid_argument("cmi_via_mine: sample blocks have different row counts");
  }
  if (samples.b.cols() < 1) throw std::invalid_argument("cmi_via_mine: B needs at least one column");
  PairedSamples full{samples.a, Eigen::MatrixXd(n, samples.b.cols() + samples.c.cols())};
  full.s << samples.b, samples.c;

  PairedSamples near{samples.a, samples.b};
  if (zero_pad) {
    near.s = Eigen::MatrixXd::Zero(n, samples.b.cols() + samples.c.cols());
    near.s.leftCols(samples.b.cols()) = samples.b;
  }
  MineConfig c1 = cfg;
  c1.seed = derive_seed(cfg.seed, 0);
  MineConfig c2 = cfg;
  c2.seed = derive_seed(cfg.seed, 1);

  MineCmiResult res;
  res.joint_bc = mine_estimate(full, c1);
  res.joint_b = mine_estimate(near, c2);
  res.cmi = res.joint_bc.estimate - res.joint_b.estimate;
  return res;
}

}  // namespace ldm
