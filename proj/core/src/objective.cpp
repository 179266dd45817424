#include "relu_recover/objective.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace relu_recover {

namespace {

constexpr Eigen::Index kChunkRows = 8192;
constexpr Eigen::Index kMinMonteCarlo = 10000;

void check_shapes(const WeightMatrix& w, Eigen::Index input_dim, const char* op) {
  if (w.rows() != input_dim || w.cols() < 1) {
    throw std::invalid_argument(std::string(op) + ": weight matrix is " +
                                std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                                " but inputs have dimension " + std::to_string(input_dim));
  }
}

void check_dataset(const Dataset& data, const char* op) {
  if (data.labels.size() != data.n()) {
    throw std::invalid_argument(std::string(op) + ": label count does not match input rows");
  }
}

Eigen::ArrayXXd active_mask(const Matrix& pre) { return (pre.array() >= 0.0).cast<double>(); }

// Rows of `x` replicated K times, column block j masked by 1{w_j^T x >= 0}.
Matrix masked_features(const Matrix& x, const WeightMatrix& w) {
  const Eigen::Index d = x.cols();
  const Eigen::ArrayXXd mask = active_mask(x * w);
  Matrix z(x.rows(), d * w.cols());
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    z.middleCols(j * d, d) = (x.array().colwise() * mask.col(j)).matrix();
  }
  return z;
}

Matrix symmetric_gram(const Matrix& z) {
  Matrix s = Matrix::Zero(z.cols(), z.cols());
  s.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
  return s.selfadjointView<Eigen::Lower>();
}

void require_min_samples(Eigen::Index n_mc, const char* op) {
  if (n_mc < kMinMonteCarlo) {
    throw std::invalid_argument(std::string(op) + ": n_mc must be >= 10^4, got " +
                                std::to_string(n_mc));
  }
}

MonteCarloEstimate finish_estimate(const Matrix& sum, const Matrix& sum_sq, Eigen::Index n) {
  const double nn = static_cast<double>(n);
  MonteCarloEstimate est;
  est.mean = sum / nn;
  const Matrix var = ((sum_sq / nn).array() - est.mean.array().square()).max(0.0).matrix() *
                     (nn / (nn - 1.0));
  est.se = (var / nn).cwiseSqrt();
  return est;
}

}  // namespace

BlockMatrix::BlockMatrix(Eigen::Index k, Eigen::Index d, Matrix flat)
    : k_(k), d_(d), flat_(std::move(flat)) {
  if (flat_.rows() != k * d || flat_.cols() != k * d) {
    throw std::invalid_argument("BlockMatrix: flat matrix must be dK x dK");
  }
}

Matrix BlockMatrix::apply(const Matrix& w) const {
  if (w.rows() != d_ || w.cols() != k_) throw std::invalid_argument("BlockMatrix::apply: shape");
  const Vector out = flat_ * vec(w);
  return Eigen::Map<const Matrix>(out.data(), d_, k_);
}

LossAndGradient empirical_loss_and_gradient(const WeightMatrix& w, const Dataset& data) {
  check_shapes(w, data.dim(), "empirical_loss_and_gradient");
  check_dataset(data, "empirical_loss_and_gradient");
  const Matrix pre = data.inputs * w;
  const Vector residual = pre.cwiseMax(0.0).rowwise().sum() - data.labels;
  const Matrix weighted = (active_mask(pre).colwise() * residual.array()).matrix();
  const double n = static_cast<double>(data.n());
  return {0.5 * residual.squaredNorm() / n, data.inputs.transpose() * weighted / n};
}

double empirical_loss(const WeightMatrix& w, const Dataset& data) {
  check_shapes(w, data.dim(), "empirical_loss");
  check_dataset(data, "empirical_loss");
  const Vector residual = predict(w, data.inputs) - data.labels;
  return 0.5 * residual.squaredNorm() / static_cast<double>(data.n());
}

Matrix empirical_gradient(const WeightMatrix& w, const Dataset& data) {
  return empirical_loss_and_gradient(w, data).gradient;
}

Matrix sigma_hat(const Eigen::Ref<const Vector>& w_a, const Eigen::Ref<const Vector>& w_b,
                 const Matrix& inputs) {
  if (w_a.size() != inputs.cols() || w_b.size() != inputs.cols()) {
    throw std::invalid_argument("sigma_hat: weight vectors must match input dimension " +
                                std::to_string(inputs.cols()));
  }
  const Eigen::ArrayXd mask =
      ((inputs * w_a).array() >= 0.0 && (inputs * w_b).array() >= 0.0).cast<double>();
  const Matrix masked = (inputs.array().colwise() * mask).matrix();
  return symmetric_gram(masked) / static_cast<double>(inputs.rows());
}

Matrix error_matrix(const WeightMatrix& w, const Dataset& data) {
  check_shapes(w, data.dim(), "error_matrix");
  if (!data.noise) throw std::invalid_argument("error_matrix: dataset carries no noise record");
  if (data.noise->size() != data.n()) {
    throw std::invalid_argument("error_matrix: noise record length does not match N");
  }
  const Matrix weighted = (active_mask(data.inputs * w).colwise() * data.noise->array()).matrix();
  return data.inputs.transpose() * weighted / static_cast<double>(data.n());
}

BlockMatrix omega_hat(const WeightMatrix& w_a, const WeightMatrix& w_b, const Matrix& inputs) {
  if (w_a.rows() != w_b.rows() || w_a.cols() != w_b.cols()) {
    throw std::invalid_argument("omega_hat: weight matrices differ in shape");
  }
  check_shapes(w_a, inputs.cols(), "omega_hat");
  const Eigen::Index d = w_a.rows();
  const Eigen::Index k = w_a.cols();
  const bool same = (w_a.array() == w_b.array()).all();
  Matrix acc = Matrix::Zero(d * k, d * k);
  for (Eigen::Index start = 0; start < inputs.rows(); start += kChunkRows) {
    const Eigen::Index rows = std::min(kChunkRows, inputs.rows() - start);
    const Matrix x = inputs.middleRows(start, rows);
    const Matrix z_a = masked_features(x, w_a);
    if (same) {
      acc += symmetric_gram(z_a);
    } else {
      acc.noalias() += masked_features(x, w_b).transpose() * z_a;
    }
  }
  return BlockMatrix(k, d, acc / static_cast<double>(inputs.rows()));
}

GradientDecomposition gradient_decomposition(const WeightMatrix& w, const WeightMatrix& w_star,
                                             const Dataset& data) {
  check_shapes(w_star, data.dim(), "gradient_decomposition");
  GradientDecomposition out;
  out.signal = omega_hat(w, w, data.inputs).apply(w) - omega_hat(w_star, w, data.inputs).apply(w_star);
  out.noise_part = error_matrix(w, data);
  out.total = out.signal - out.noise_part;
  return out;
}

MonteCarloEstimate population_sigma_mc(const Eigen::Ref<const Vector>& w_a,
                                       const Eigen::Ref<const Vector>& w_b, Eigen::Index n_mc,
                                       RngStream& rng) {
  require_min_samples(n_mc, "population_sigma_mc");
  if (w_a.size() != w_b.size() || w_a.size() < 1) {
    throw std::invalid_argument("population_sigma_mc: vectors must share a positive dimension");
  }
  const Eigen::Index d = w_a.size();
  Matrix sum = Matrix::Zero(d, d);
  Matrix sum_sq = Matrix::Zero(d, d);
  for (Eigen::Index start = 0; start < n_mc; start += kChunkRows) {
    const Eigen::Index rows = std::min(kChunkRows, n_mc - start);
    const Matrix x = standard_gaussian_matrix(rows, d, rng);
    const Eigen::ArrayXd mask =
        ((x * w_a).array() >= 0.0 && (x * w_b).array() >= 0.0).cast<double>();
    const Matrix masked = (x.array().colwise() * mask).matrix();
    sum += symmetric_gram(masked);
    sum_sq += symmetric_gram(masked.cwiseAbs2());
  }
  return finish_estimate(sum, sum_sq, n_mc);
}

MonteCarloEstimate population_gradient_mc_estimate(const WeightMatrix& w, const TeacherSpec& spec,
                                                   Eigen::Index n_mc, RngStream& rng) {
  require_min_samples(n_mc, "population_gradient_mc");
  check_shapes(w, spec.dim(), "population_gradient_mc");
  if (w.cols() != spec.width()) {
    throw std::invalid_argument("population_gradient_mc: W and W* differ in width");
  }
  Matrix sum = Matrix::Zero(w.rows(), w.cols());
  Matrix sum_sq = Matrix::Zero(w.rows(), w.cols());
  for (Eigen::Index start = 0; start < n_mc; start += kChunkRows) {
    const Eigen::Index rows = std::min(kChunkRows, n_mc - start);
    const Matrix x = standard_gaussian_matrix(rows, spec.dim(), rng);
    const Matrix pre = x * w;
    const Vector residual = pre.cwiseMax(0.0).rowwise().sum() - predict(spec.w_star, x);
    const Eigen::ArrayXXd mask = active_mask(pre);
    sum.noalias() += x.transpose() * (mask.colwise() * residual.array()).matrix();
    sum_sq.noalias() +=
        x.cwiseAbs2().transpose() * (mask.colwise() * residual.array().square()).matrix();
  }
  return finish_estimate(sum, sum_sq, n_mc);
}

Matrix population_gradient_mc(const WeightMatrix& w, const TeacherSpec& spec, Eigen::Index n_mc,
                              RngStream& rng) {
  return population_gradient_mc_estimate(w, spec, n_mc, rng).mean;
}

BlockMatrix empirical_hessian(const WeightMatrix& w, const Matrix& inputs) {
  check_shapes(w, inputs.cols(), "empirical_hessian");
  const bool on_boundary = ((inputs * w).array() == 0.0).any();
  if (on_boundary) {
    const WeightMatrix shifted = w.array() + 1e-12;
    return omega_hat(shifted, shifted, inputs);
  }
  return omega_hat(w, w, inputs);
}

}  // namespace relu_recover
