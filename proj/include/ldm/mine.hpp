#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ldm/seed.hpp"

namespace ldm {

struct MineConfig {
  int batch = 256;
  double learning_rate = 1e-3;
  int iterations = 20000;
  /// Rate of the moving average of E_marg[e^T] used in the gradient.
  double ema_rate = 0.001;
  std::uint64_t seed = 0;
  int hidden = 64;
  /// Number of column shuffles pooled for the final full-data evaluation.
  int eval_shuffles = 4;

  void validate() const;
};

/// Two hidden layers with SiLU activations and a scalar output.
class Mlp {
public:
  Mlp(int input, int hidden, std::uint64_t seed);

  int input_dim() const { return input_; }
  int hidden_dim() const { return hidden_; }
  Eigen::VectorXd& params() { return theta_; }
  const Eigen::VectorXd& params() const { return theta_; }

  /// Columns of `x` are inputs; returns one output per column.
  Eigen::RowVectorXd forward(const Eigen::MatrixXd& x) const;

  /// Forward pass followed by backpropagation of d(loss)/d(output) given
  /// as `grad_out`; returns d(loss)/d(params).
  Eigen::VectorXd backward(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& grad_out) const;

  /// Activations of one forward pass, kept for the matching backward pass.
  struct Pass {
    Eigen::MatrixXd z1, s1, h1, z2, s2, h2;
    Eigen::RowVectorXd out;
  };
  Pass run(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd gradient(const Eigen::MatrixXd& x, const Pass& pass, const Eigen::RowVectorXd& grad_out) const;

private:
  struct Views;
  Views views() const;

  int input_;
  int hidden_;
  Eigen::VectorXd theta_;
};

/// Paired samples: row i of `a` goes with row i of `s`.
struct PairedSamples {
  Eigen::MatrixXd a;
  Eigen::MatrixXd s;

  Eigen::Index size() const { return a.rows(); }
};

struct MineResult {
  /// Donsker-Varadhan bound of the trained critic on the full sample set.
  double estimate = 0.0;
  /// Moving average of the per-batch bounds over training.
  double batch_average = 0.0;
  int iterations = 0;
};

/// Trains T_theta by Adam ascent on E_joint[T] - ln E_marg[e^T]. Marginal
/// pairs come from permuting the s rows inside each batch. Deterministic
/// for a fixed seed.
MineResult mine_estimate(const PairedSamples& samples, const MineConfig& cfg);

struct CmiSamples {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::MatrixXd c;
};

struct MineCmiResult {
  double cmi = 0.0;
  MineResult joint_bc;  // I(A : BC)
  MineResult joint_b;   // I(A : B)
};

/// I(A:C|B) = I(A:BC) - I(A:B) from two MINE runs. With zero_pad the second
/// run sees (B, 0...0) with |C| zero columns, matching the input width of
/// the first run.
MineCmiResult cmi_via_mine(const CmiSamples& samples, const MineConfig& cfg, bool zero_pad = false);

}  // namespace ldm
