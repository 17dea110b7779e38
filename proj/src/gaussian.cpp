#include "ldm/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ldm/errors.hpp"

namespace ldm {

namespace {

constexpr double kSymTol = 1e-10;
constexpr double kSpdTol = 1e-10;
// Diagonal jitter used only inside inversions of singular-looking matrices.
constexpr double kJitter = 1e-12;

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& s) { return 0.5 * (s + s.transpose()); }

double min_eigenvalue(const Eigen::MatrixXd& s) {
  if (s.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Cholesky factor of an SPD matrix, retrying once with jitter.
Eigen::LLT<Eigen::MatrixXd> factor_spd(const Eigen::MatrixXd& s, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() == Eigen::Success) return llt;
  Eigen::MatrixXd j = s;
  j.diagonal().array() += kJitter;
  llt.compute(j);
  if (llt.info() != Eigen::Success) {
    throw NumericError(std::string(what) + ": matrix is not positive definite");
  }
  return llt;
}

double log_det_spd(const Eigen::MatrixXd& s, const char* what) {
  if (s.size() == 0) return 0.0;
  auto llt = factor_spd(s, what);
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::MatrixXd select(const Eigen::MatrixXd& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  }
  return out;
}

Eigen::VectorXd select(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

std::vector<int> concat(const Region& a, const Region& b) {
  std::vector<int> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void check_sites(const Region& r, Eigen::Index dim, const char* what) {
  for (int s : r) {
    if (s < 0 || s >= dim) throw std::invalid_argument(std::string(what) + ": site outside dimension");
  }
}

}  // namespace

GaussianDist::GaussianDist(Eigen::VectorXd mean, Eigen::MatrixXd cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
    throw std::invalid_argument("GaussianDist: covariance shape does not match the mean");
  }
  if (!mean_.allFinite() || !cov_.allFinite()) throw std::invalid_argument("GaussianDist: non-finite entries");
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > kSymTol * std::max(1.0, cov_.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("GaussianDist: covariance is not symmetric");
  }
  cov_ = symmetrize(cov_);
  const double lo = min_eigenvalue(cov_);
  if (!(lo > kSpdTol)) {
    std::ostringstream os;
    os << "GaussianDist: covariance not positive definite (smallest eigenvalue " << lo << ")";
    throw std::invalid_argument(os.str());
  }
}

GaussianDist GaussianDist::marginal(const std::vector<int>& idx) const {
  for (int i : idx) {
    if (i < 0 || i >= dim()) throw std::invalid_argument("GaussianDist::marginal: index out of range");
  }
  return GaussianDist(select(mean_, idx), select(cov_, idx, idx));
}

double GaussianDist::log_density(const Eigen::VectorXd& x) const {
  auto llt = factor_spd(cov_, "log_density");
  Eigen::VectorXd d = x - mean_;
  Eigen::VectorXd z = llt.matrixL().solve(d);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (z.squaredNorm() + logdet + static_cast<double>(dim()) * std::log(2.0 * std::numbers::pi));
}

LinearChannel LinearChannel::identity(Eigen::Index dim) {
  return {Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Zero(dim, dim)};
}

void LinearChannel::validate() const {
  const Eigen::Index k = b.size();
  if (m.rows() != k || m.cols() != k || noise_cov.rows() != k || noise_cov.cols() != k) {
    throw std::invalid_argument("LinearChannel: inconsistent dimensions");
  }
  if ((noise_cov - noise_cov.transpose()).cwiseAbs().maxCoeff() > kSymTol) {
    throw std::invalid_argument("LinearChannel: noise covariance is not symmetric");
  }
  if (k > 0 && min_eigenvalue(noise_cov) < -kSpdTol) {
    throw std::invalid_argument("LinearChannel: noise covariance is not positive semidefinite");
  }
}

LinearChannel forward_step(Eigen::Index dim, double t, double t2) {
  if (!(t >= 0.0 && t < 1.0) || !(t2 <= 1.0)) {
    throw std::invalid_argument("forward_step: need 0 <= t < 1 and t2 <= 1");
  }
  if (t2 < t) throw std::invalid_argument("forward_step: t2 must not precede t");
  const double a = (1.0 - t2) / (1.0 - t);
  const double q = std::max(0.0, t2 * t2 - a * a * t * t);
  return {a * Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim),
          q * Eigen::MatrixXd::Identity(dim, dim)};
}

LinearChannel local_forward_step(Eigen::Index dim, const Region& sites, double t, double t2) {
  check_sites(sites, dim, "local_forward_step");
  auto one = forward_step(1, t, t2);
  LinearChannel ch = LinearChannel::identity(dim);
  for (int s : sites) {
    ch.m(s, s) = one.m(0, 0);
    ch.noise_cov(s, s) = one.noise_cov(0, 0);
  }
  return ch;
}

GaussianDist push(const LinearChannel& ch, const GaussianDist& p) {
  if (ch.dim() != p.dim()) throw std::invalid_argument("push: dimension mismatch");
  Eigen::VectorXd mean = ch.m * p.mean() + ch.b;
  Eigen::MatrixXd cov = symmetrize(ch.m * p.cov() * ch.m.transpose() + ch.noise_cov);
  try {
    return GaussianDist(std::move(mean), std::move(cov));
  } catch (const std::invalid_argument& e) {
    throw NumericError(std::string("push: degenerate output: ") + e.what());
  }
}

LinearChannel bayes_reverse(const LinearChannel& ch, const GaussianDist& prior) {
  ch.validate();
  if (ch.dim() != prior.dim()) throw std::invalid_argument("bayes_reverse: dimension mismatch");
  const Eigen::MatrixXd& sigma = prior.cov();
  Eigen::MatrixXd cross = sigma * ch.m.transpose();  // Cov(X, Y)
  Eigen::MatrixXd s = symmetrize(ch.m * cross + ch.noise_cov);
  auto llt = factor_spd(s, "bayes_reverse");
  Eigen::MatrixXd gain = llt.solve(cross.transpose()).transpose();
  LinearChannel rev;
  rev.m = gain;
  rev.b = prior.mean() - gain * (ch.m * prior.mean() + ch.b);
  rev.noise_cov = symmetrize(sigma - gain * cross.transpose());
  return rev;
}

LinearChannel local_bayes_reverse(const LinearChannel& ch, const GaussianDist& prior_ab, const Tripartition& part) {
  ch.validate();
  const Eigen::Index k = ch.dim();
  check_sites(part.a, k, "local_bayes_reverse");
  check_sites(part.b, k, "local_bayes_reverse");
  const auto na = static_cast<Eigen::Index>(part.a.size());
  const auto nb = static_cast<Eigen::Index>(part.b.size());
  if (prior_ab.dim() != na + nb) {
    throw std::invalid_argument("local_bayes_reverse: prior must cover exactly A then B");
  }
  const std::vector<int> a(part.a.begin(), part.a.end());
  for (Eigen::Index i = 0; i < k; ++i) {
    if (part.a.contains(static_cast<int>(i))) continue;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double expect = i == j ? 1.0 : 0.0;
      if (std::abs(ch.m(i, j) - expect) > 1e-12 || std::abs(ch.noise_cov(i, j)) > 1e-12 ||
          std::abs(ch.m(j, i) - (i == j ? 1.0 : 0.0)) > 1e-12) {
        throw std::invalid_argument("local_bayes_reverse: channel acts outside A");
      }
    }
    if (ch.b[i] != 0.0) throw std::invalid_argument("local_bayes_reverse: channel shifts a site outside A");
  }

  const Eigen::MatrixXd m_aa = select(ch.m, a, a);
  const Eigen::MatrixXd q_aa = select(ch.noise_cov, a, a);
  const Eigen::VectorXd b_a = select(ch.b, a);
  const Eigen::MatrixXd& sig = prior_ab.cov();
  const Eigen::MatrixXd s_aa = sig.topLeftCorner(na, na);
  const Eigen::MatrixXd s_ab = sig.topRightCorner(na, nb);
  const Eigen::MatrixXd s_bb = sig.bottomRightCorner(nb, nb);
  const Eigen::VectorXd mu_a = prior_ab.mean().head(na);
  const Eigen::VectorXd mu_b = prior_ab.mean().tail(nb);

  // Condition X_A on Z = (Y_A, X_B).
  Eigen::MatrixXd cov_z(na + nb, na + nb);
  cov_z.topLeftCorner(na, na) = m_aa * s_aa * m_aa.transpose() + q_aa;
  cov_z.topRightCorner(na, nb) = m_aa * s_ab;
  cov_z.bottomLeftCorner(nb, na) = (m_aa * s_ab).transpose();
  cov_z.bottomRightCorner(nb, nb) = s_bb;
  cov_z = symmetrize(cov_z);
  Eigen::MatrixXd cross(na, na + nb);  // Cov(X_A, Z)
  cross.leftCols(na) = s_aa * m_aa.transpose();
  cross.rightCols(nb) = s_ab;
  auto llt = factor_spd(cov_z, "local_bayes_reverse");
  Eigen::MatrixXd gain = llt.solve(cross.transpose()).transpose();
  Eigen::VectorXd mu_z(na + nb);
  mu_z << m_aa * mu_a + b_a, mu_b;

  LinearChannel rev = LinearChannel::identity(k);
  for (Eigen::Index i = 0; i < na; ++i) {
    const int row = a[i];
    rev.m.row(row).setZero();
    for (Eigen::Index j = 0; j < na; ++j) rev.m(row, a[j]) = gain(i, j);
    Eigen::Index j = 0;
    for (int bs : part.b) rev.m(row, bs) = gain(i, na + j++);
  }
  const Eigen::VectorXd shift = mu_a - gain * mu_z;
  const Eigen::MatrixXd cond = symmetrize(s_aa - gain * cross.transpose());
  for (Eigen::Index i = 0; i < na; ++i) {
    rev.b[a[i]] = shift[i];
    for (Eigen::Index j = 0; j < na; ++j) rev.noise_cov(a[i], a[j]) = cond(i, j);
  }
  return rev;
}

LinearChannel local_bayes_reverse_from(const LinearChannel& ch, const GaussianDist& prior, const Tripartition& part) {
  return local_bayes_reverse(ch, prior.marginal(concat(part.a, part.b)), part);
}

double gaussian_kl(const GaussianDist& p, const GaussianDist& q) {
  if (p.dim() != q.dim()) throw std::invalid_argument("gaussian_kl: dimension mismatch");
  auto llt_q = factor_spd(q.cov(), "gaussian_kl");
  const Eigen::VectorXd d = q.mean() - p.mean();
  const double trace = llt_q.solve(p.cov()).trace();
  const double maha = d.dot(llt_q.solve(d));
  const double v = 0.5 * (trace + maha - static_cast<double>(p.dim()) + log_det_spd(q.cov(), "gaussian_kl") -
                          log_det_spd(p.cov(), "gaussian_kl"));
  return std::max(0.0, v);
}

double gaussian_cmi(const GaussianDist& p, const Region& a, const Region& b, const Region& c) {
  for (const Region* r : {&a, &b, &c}) check_sites(*r, p.dim(), "gaussian_cmi");
  auto ld = [&](std::vector<int> idx) { return log_det_spd(select(p.cov(), idx, idx), "gaussian_cmi"); };
  std::vector<int> ab = concat(a, b);
  std::vector<int> bc = concat(b, c);
  std::vector<int> abc = ab;
  abc.insert(abc.end(), c.begin(), c.end());
  const double v = 0.5 * (ld(ab) + ld(bc) - ld(std::vector<int>(b.begin(), b.end())) - ld(abc));
  return std::max(0.0, v);
}

double gaussian_cmi(const GaussianDist& p, const Tripartition& part) { return gaussian_cmi(p, part.a, part.b, part.c); }

Eigen::VectorXd score(const GaussianDist& p, const Eigen::VectorXd& x) {
  if (x.size() != p.dim()) throw std::invalid_argument("score: dimension mismatch");
  return -factor_spd(p.cov(), "score").solve(x - p.mean());
}

MarkovFit markov_length_fit(const std::vector<double>& rs, const std::vector<double>& cmis) {
  if (rs.size() != cmis.size()) throw std::invalid_argument("markov_length_fit: size mismatch");
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (cmis[i] > 1e-14) {
      xs.push_back(rs[i]);
      ys.push_back(std::log(cmis[i]));
    }
  }
  if (xs.size() < 2) throw std::invalid_argument("markov_length_fit: need at least two points with cmi > 1e-14");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("markov_length_fit: all widths coincide");
  MarkovFit fit;
  fit.points = static_cast<int>(xs.size());
  fit.slope = sxy / sxx;
  const double intercept = my - fit.slope * mx;
  fit.gamma = std::exp(intercept);
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (intercept + fit.slope * xs[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  fit.decaying = fit.slope < 0.0;
  fit.xi = fit.decaying ? -1.0 / fit.slope : std::numeric_limits<double>::infinity();
  return fit;
}

GaussianDist gmrf(const Lattice& lat, double coupling) {
  const int k = lat.size();
  Eigen::MatrixXd prec = Eigen::MatrixXd::Identity(k, k);
  for (int s = 0; s < k; ++s) {
    for (int t = s + 1; t < k; ++t) {
      if (lat.distance(s, t) != 1) continue;
      auto cs = lat.coords(s);
      auto ct = lat.coords(t);
      // Nearest-neighbour bonds only: diagonal Chebyshev neighbours excluded.
      int moved = 0;
      for (int ax = 0; ax < lat.dim(); ++ax) moved += cs[ax] != ct[ax];
      if (moved != 1) continue;
      prec(s, t) -= coupling;
      prec(t, s) -= coupling;
    }
  }
  if (!(min_eigenvalue(prec) > kSpdTol)) {
    throw std::invalid_argument("gmrf: coupling too strong, precision is not positive definite");
  }
  Eigen::MatrixXd cov = prec.inverse();
  return GaussianDist(Eigen::VectorXd::Zero(k), symmetrize(cov));
}

RecoveryResult multi_step_local_recovery(const GaussianDist& p0, const Lattice& lat, int steps, int r,
                                         const RecoveryOptions& opts) {
  if (p0.dim() != lat.size()) throw std::invalid_argument("multi_step_local_recovery: P0 dimension != lattice size");
  if (steps < 1) throw std::invalid_argument("multi_step_local_recovery: need at least one step");
  if (!(opts.t_max > 0.0 && opts.t_max < 1.0)) {
    throw std::invalid_argument("multi_step_local_recovery: t_max must lie in (0, 1)");
  }
  const ReorgSchedule sched = reorganize(lat, opts.k, r);
  int probe = opts.probe_site;
  if (probe < 0) {
    probe = lat.dim() == 1 ? lat.length() / 2 : lat.site({lat.length() / 2, lat.length() / 2});
  }
  const Tripartition probe_part = build_tripartition(lat, probe, opts.k, r);

  struct Record {
    LinearChannel forward;
    Tripartition part;
    GaussianDist prior;
  };
  std::vector<Record> records;
  RecoveryResult res;
  res.substeps_per_step = static_cast<int>(sched.substeps.size());

  GaussianDist cur = p0;
  const double dt = opts.t_max / steps;
  for (int n = 1; n <= steps; ++n) {
    const double t = (n - 1) * dt;
    const double t2 = n * dt;
    for (const auto& sub : sched.substeps) {
      for (const auto& region : sub) {
        Record rec{local_forward_step(lat.size(), region, t, t2), tripartition_around(lat, region, r), cur};
        cur = push(rec.forward, cur);
        records.push_back(std::move(rec));
      }
    }
    res.max_cmi = std::max(res.max_cmi, gaussian_cmi(cur, probe_part));
  }

  GaussianDist rec_state = cur;
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    const LinearChannel rev = local_bayes_reverse_from(it->forward, it->prior, it->part);
    rec_state = push(rev, rec_state);
    res.sum_step_kl += gaussian_kl(it->prior, push(rev, push(it->forward, it->prior)));
  }
  res.channels = static_cast<int>(records.size());
  res.kl = gaussian_kl(p0, rec_state);
  return res;
}

}  // namespace ldm
