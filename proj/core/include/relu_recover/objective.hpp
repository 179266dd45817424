#pragma once

#include "relu_recover/numerics.hpp"
#include "relu_recover/teacher.hpp"

namespace relu_recover {

// All half-space indicators use the inclusive convention 1{z >= 0}.

/// K x K grid of d x d blocks, stored flattened as a dK x dK matrix so that
/// it acts directly on vec(W) (columns of W stacked).
class BlockMatrix {
 public:
  BlockMatrix(Eigen::Index k, Eigen::Index d, Matrix flat);

  Eigen::Index k() const { return k_; }
  Eigen::Index d() const { return d_; }
  const Matrix& flat() const { return flat_; }

  /// Block in block-row `row`, block-column `col`.
  Matrix block(Eigen::Index row, Eigen::Index col) const {
    return flat_.block(row * d_, col * d_, d_, d_);
  }

  /// Reshaped product: returns the d x K matrix whose vec is flat() * vec(w).
  Matrix apply(const Matrix& w) const;

 private:
  Eigen::Index k_;
  Eigen::Index d_;
  Matrix flat_;
};

/// The two terms of the gradient: total = signal - noise_part.
struct GradientDecomposition {
  Matrix signal;      // Omega(W,W) vec(W) - Omega(W*,W) vec(W*)
  Matrix noise_part;  // E(W)
  Matrix total;
};

struct LossAndGradient {
  double loss = 0.0;
  Matrix gradient;
};

/// (1/2N) sum_i (sum_j relu(w_j^T x_i) - y_i)^2
double empirical_loss(const WeightMatrix& w, const Dataset& data);

/// Column k: (1/N) sum_i r_i 1{w_k^T x_i >= 0} x_i with residual
/// r_i = prediction_i - y_i. One pass, O(N d K).
Matrix empirical_gradient(const WeightMatrix& w, const Dataset& data);

/// Loss and gradient sharing a single residual evaluation.
LossAndGradient empirical_loss_and_gradient(const WeightMatrix& w, const Dataset& data);

/// (1/N) sum_i x_i x_i^T 1{w_a^T x_i >= 0} 1{w_b^T x_i >= 0}; exactly symmetric.
Matrix sigma_hat(const Eigen::Ref<const Vector>& w_a, const Eigen::Ref<const Vector>& w_b,
                 const Matrix& inputs);

/// Column k: (1/N) sum_i eps_i 1{w_k^T x_i >= 0} x_i. Needs the noise record.
Matrix error_matrix(const WeightMatrix& w, const Dataset& data);

/// Block (k, j) = sigma_hat(column j of w_a, column k of w_b).
BlockMatrix omega_hat(const WeightMatrix& w_a, const WeightMatrix& w_b, const Matrix& inputs);

/// Gradient assembled from omega_hat and error_matrix.
GradientDecomposition gradient_decomposition(const WeightMatrix& w, const WeightMatrix& w_star,
                                             const Dataset& data);

/// Monte Carlo mean with a per-entry standard error.
struct MonteCarloEstimate {
  Matrix mean;
  Matrix se;
  double max_se() const { return se.maxCoeff(); }
};

/// Estimates E[X X^T 1{w_a^T X >= 0} 1{w_b^T X >= 0}], X ~ N(0, I_d).
/// Requires n_mc >= 10^4.
MonteCarloEstimate population_sigma_mc(const Eigen::Ref<const Vector>& w_a,
                                       const Eigen::Ref<const Vector>& w_b, Eigen::Index n_mc,
                                       RngStream& rng);

/// Unbiased estimate of the population gradient: the empirical gradient on
/// n_mc fresh noiseless samples drawn in the same order as generate_dataset.
/// Requires n_mc >= 10^4.
MonteCarloEstimate population_gradient_mc_estimate(const WeightMatrix& w, const TeacherSpec& spec,
                                                   Eigen::Index n_mc, RngStream& rng);
Matrix population_gradient_mc(const WeightMatrix& w, const TeacherSpec& spec, Eigen::Index n_mc,
                              RngStream& rng);

/// omega_hat(W, W, inputs): the Hessian of the empirical loss on the
/// activation cell containing W. If some input lies exactly on an activation
/// boundary, W is shifted by 1e-12 first.
BlockMatrix empirical_hessian(const WeightMatrix& w, const Matrix& inputs);

}  // namespace relu_recover
