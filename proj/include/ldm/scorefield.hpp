#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ldm/lattice.hpp"

namespace ldm {

/// Data points as rows, with the lattice that gives their coordinates a
/// patch geometry (a 1D open chain unless told otherwise).
class Dataset {
public:
  explicit Dataset(Eigen::MatrixXd samples);
  Dataset(Eigen::MatrixXd samples, Lattice lat);

  const Eigen::MatrixXd& samples() const { return x_; }
  const Lattice& lattice() const { return lat_; }
  Eigen::Index size() const { return x_.rows(); }
  Eigen::Index dim() const { return x_.cols(); }

private:
  Eigen::MatrixXd x_;
  Lattice lat_;
};

/// Linear schedule alpha_t = t. Backward integration runs from t_max down to
/// t_min over `steps` uniform steps.
struct NoiseSchedule {
  int steps = 200;
  double t_min = 0.01;
  double t_max = 1.0;

  static double alpha(double t) { return t; }
  void validate() const;
};

enum class SamplerMode { global, local, hybrid };

struct SamplerConfig {
  double eta = 0.0;
  SamplerMode mode = SamplerMode::global;
  int r = 1;
  int k = 1;
  /// Times where the hybrid sampler uses the global score.
  std::vector<std::pair<double, double>> global_intervals{{0.2, 0.5}};
  int draws = 1000;
  std::uint64_t seed = 0;
  /// Replace the state at t_min by its posterior mean.
  bool denoise_final = true;

  void validate() const;
};

/// Posterior weights of the data points given X_t = x, log-sum-exp
/// stabilized; weights below 1e-300 are flushed to zero.
Eigen::VectorXd mixture_weights(const Dataset& ds, double t, const Eigen::VectorXd& x);

/// log P_t(x) of the mixture with centers (1-t) X_i and covariance t^2 I.
double mixture_log_density(const Dataset& ds, double t, const Eigen::VectorXd& x);

/// grad log P_t(x) = (sum_i w_i c_i - x) / t^2.
Eigen::VectorXd mixture_score(const Dataset& ds, double t, const Eigen::VectorXd& x);

/// Score of the A u B marginal on the coordinates of A (Region order).
/// Only the A u B entries of x are read.
Eigen::VectorXd local_mixture_score(const Dataset& ds, double t, const Eigen::VectorXd& x, const Tripartition& part);

/// E[X_0 - Z | X_t = x] = (x + t s(x)) / (1 - t) for 0 < t < 1.
Eigen::VectorXd flow_velocity(const Dataset& ds, double t, const Eigen::VectorXd& x);

/// One row per draw. Each step from t to s < t moves along the exact
/// Gaussian bridge towards the posterior mean estimate: the eta = 0 case
/// is the Euler step of the probability-flow ODE, eta = 1 samples the
/// exact reverse conditional. Local mode updates the reorganized k-blocks
/// in reverse order, each from the A u B marginal with the per-coordinate
/// times reached so far. With denoise_final the returned points are the
/// posterior means at t_min.
Eigen::MatrixXd sample_backward(const Dataset& ds, const NoiseSchedule& schedule, const SamplerConfig& cfg);

}  // namespace ldm
