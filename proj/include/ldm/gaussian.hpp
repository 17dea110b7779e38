#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "ldm/lattice.hpp"

namespace ldm {

/// Multivariate normal with symmetric positive-definite covariance.
class GaussianDist {
public:
  /// Throws std::invalid_argument unless cov is symmetric within 1e-10 and
  /// its smallest eigenvalue exceeds 1e-10 (scaled by the largest).
  GaussianDist(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  Eigen::Index dim() const { return mean_.size(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }

  /// Marginal on the listed coordinates, in the given order.
  GaussianDist marginal(const std::vector<int>& idx) const;
  double log_density(const Eigen::VectorXd& x) const;

private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

/// y = M x + b + noise, noise ~ N(0, noise_cov).
struct LinearChannel {
  Eigen::MatrixXd m;
  Eigen::VectorXd b;
  Eigen::MatrixXd noise_cov;

  static LinearChannel identity(Eigen::Index dim);
  Eigen::Index dim() const { return b.size(); }
  /// Dimensions consistent and noise PSD within 1e-10.
  void validate() const;
};

/// Kernel taking the linear-interpolation marginal at time t to the one at
/// t2 >= t for any Gaussian start: M = a I with a = (1-t2)/(1-t), noise
/// variance t2^2 - a^2 t^2. t2 == t gives the identity.
LinearChannel forward_step(Eigen::Index dim, double t, double t2);

/// Same kernel acting only on `sites`; identity elsewhere.
LinearChannel local_forward_step(Eigen::Index dim, const Region& sites, double t, double t2);

/// Pushforward. Throws if the result is not positive definite.
GaussianDist push(const LinearChannel& ch, const GaussianDist& p);

/// Exact conditional X | Y for X ~ prior, Y = channel(X), as a channel.
LinearChannel bayes_reverse(const LinearChannel& ch, const GaussianDist& prior);

/// Local Bayes recovery of a channel acting on A only. `prior_ab` is the
/// marginal of the current global state on the coordinates A followed by B
/// (in Region order). The result writes A from (Y_A, X_B) and is the
/// identity elsewhere.
LinearChannel local_bayes_reverse(const LinearChannel& ch, const GaussianDist& prior_ab, const Tripartition& part);

/// Convenience: takes the A-then-B marginal of `prior` itself.
LinearChannel local_bayes_reverse_from(const LinearChannel& ch, const GaussianDist& prior, const Tripartition& part);

double gaussian_kl(const GaussianDist& p, const GaussianDist& q);

/// Differential-entropy CMI from log-determinants of principal blocks,
/// clipped at zero from below.
double gaussian_cmi(const GaussianDist& p, const Tripartition& part);
double gaussian_cmi(const GaussianDist& p, const Region& a, const Region& b, const Region& c);

/// grad log p(x) = -Sigma^{-1} (x - mu).
Eigen::VectorXd score(const GaussianDist& p, const Eigen::VectorXd& x);

struct MarkovFit {
  double xi = std::numeric_limits<double>::infinity();
  double gamma = 0.0;
  /// RMS residual of the fit to ln(cmi).
  double residual = 0.0;
  double slope = 0.0;
  /// False when the data show no decay; xi is +inf then.
  bool decaying = false;
  int points = 0;
};

/// Least-squares line through (r, ln cmi) for points with cmi > 1e-14;
/// xi = -1/slope, gamma = exp(intercept).
MarkovFit markov_length_fit(const std::vector<double>& rs, const std::vector<double>& cmis);

/// Gaussian Markov random field: unit diagonal precision with -coupling on
/// nearest-neighbour bonds of the lattice (tridiagonal in 1D, 5-point in 2D).
GaussianDist gmrf(const Lattice& lat, double coupling);

struct RecoveryOptions {
  int k = 1;
  double t_max = 0.98;
  /// Site whose tripartition is used for the CMI diagnostics; -1 = middle.
  int probe_site = -1;
};

struct RecoveryResult {
  /// KL(P0 || recovered).
  double kl = 0.0;
  /// Largest CMI(A:C|B) at width r over the intermediate states P_1..P_N,
  /// for the tripartition around the probe site.
  double max_cmi = 0.0;
  /// Sum over all local channels of KL(P || B o N (P)), each term exact.
  double sum_step_kl = 0.0;
  int channels = 0;
  int substeps_per_step = 0;
};

/// Runs the reorganized forward chain on a uniform time grid t_n = n t_max / N,
/// then undoes every local forward channel in reverse order with the local
/// Bayes reversal built from the exactly propagated intermediate Gaussian.
RecoveryResult multi_step_local_recovery(const GaussianDist& p0, const Lattice& lat, int steps, int r,
                                         const RecoveryOptions& opts = {});

}  // namespace ldm
