#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "relu_recover/numerics.hpp"

namespace relu_recover {

/// Ground-truth one-hidden-layer ReLU network with unit output weights.
struct TeacherSpec {
  WeightMatrix w_star;        // d x K
  std::vector<double> sigma;  // singular values of w_star, descending
  double kappa = 1.0;         // sigma_1 / sigma_K
  double lambda = 1.0;        // prod(sigma) / sigma_K^K
  double nu = 0.0;            // label-noise standard deviation

  Eigen::Index dim() const { return w_star.rows(); }
  Eigen::Index width() const { return w_star.cols(); }
  double sigma_min() const { return sigma.back(); }
};

struct Dataset {
  Matrix inputs;               // N x d, row i is x_i
  Vector labels;               // N
  std::optional<Vector> noise; // N; absent for datasets loaded from disk
  std::uint64_t seed = 0;
  double nu = 0.0;

  Eigen::Index n() const { return inputs.rows(); }
  Eigen::Index dim() const { return inputs.cols(); }
};

inline double relu(double z) noexcept { return z > 0.0 ? z : 0.0; }

/// W* = U diag(s) V^T with (U, V) from `orthonormal_factors` and s evenly
/// spaced from sigma_max down to sigma_min.
TeacherSpec make_ground_truth(Eigen::Index d, Eigen::Index k, double sigma_min, double sigma_max,
                              RngStream& rng, double nu = 0.0);

/// Wraps arbitrary weights, computing the spectrum quantities from their SVD.
TeacherSpec teacher_from_weights(const WeightMatrix& w_star, double nu = 0.0);

/// sum_j relu(w_j^T x)
double forward(const WeightMatrix& w, const Eigen::Ref<const Vector>& x);

/// Row-wise `forward` over an N x d input matrix.
Vector predict(const WeightMatrix& w, const Matrix& inputs);

/// Inputs are drawn first (N x d, row order), then N noise values scaled by
/// spec.nu. The noise draws happen even when nu = 0, so a noiseless twin sees
/// the same inputs as its noisy counterpart.
Dataset generate_dataset(const TeacherSpec& spec, Eigen::Index n, RngStream& rng);

}  // namespace relu_recover
