#include "relu_recover/teacher.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace relu_recover {

TeacherSpec make_ground_truth(Eigen::Index d, Eigen::Index k, double sigma_min, double sigma_max,
                              RngStream& rng, double nu) {
  if (k < 2 || k > d) {
    throw std::invalid_argument("make_ground_truth: need 2 <= K <= d, got d=" + std::to_string(d) +
                                ", K=" + std::to_string(k));
  }
  if (!(sigma_min > 0.0) || !(sigma_max >= sigma_min)) {
    throw std::invalid_argument("make_ground_truth: need 0 < sigma_min <= sigma_max");
  }
  if (!(nu >= 0.0)) throw std::invalid_argument("make_ground_truth: nu must be >= 0");

  const auto factors = orthonormal_factors(d, k, rng);
  TeacherSpec spec;
  spec.sigma.resize(static_cast<std::size_t>(k));
  Vector s(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(k - 1);
    s(j) = sigma_max - t * (sigma_max - sigma_min);
  }
  s(k - 1) = sigma_min;
  for (Eigen::Index j = 0; j < k; ++j) spec.sigma[static_cast<std::size_t>(j)] = s(j);

  spec.w_star = factors.u * s.asDiagonal() * factors.v.transpose();
  spec.kappa = sigma_max / sigma_min;
  double lam = 1.0;
  for (double v : spec.sigma) lam *= v / sigma_min;
  spec.lambda = lam;
  spec.nu = nu;
  return spec;
}

TeacherSpec teacher_from_weights(const WeightMatrix& w_star, double nu) {
  if (w_star.cols() < 1 || w_star.cols() > w_star.rows()) {
    throw std::invalid_argument("teacher_from_weights: need 1 <= K <= d");
  }
  require_finite(w_star, "teacher_from_weights");
  Eigen::JacobiSVD<Matrix> svd(w_star);
  const Vector s = svd.singularValues();
  if (!(s(s.size() - 1) > 0.0)) {
    throw std::invalid_argument("teacher_from_weights: W* must have full column rank");
  }
  TeacherSpec spec;
  spec.w_star = w_star;
  spec.sigma.assign(s.data(), s.data() + s.size());
  spec.kappa = s(0) / s(s.size() - 1);
  double lam = 1.0;
  for (double v : spec.sigma) lam *= v / spec.sigma.back();
  spec.lambda = lam;
  spec.nu = nu;
  return spec;
}

double forward(const WeightMatrix& w, const Eigen::Ref<const Vector>& x) {
  if (x.size() != w.rows()) {
    throw std::invalid_argument("forward: input has length " + std::to_string(x.size()) +
                                ", weights expect " + std::to_string(w.rows()));
  }
  double out = 0.0;
  for (Eigen::Index j = 0; j < w.cols(); ++j) out += relu(w.col(j).dot(x));
  return out;
}

Vector predict(const WeightMatrix& w, const Matrix& inputs) {
  if (inputs.cols() != w.rows()) {
    throw std::invalid_argument("predict: inputs have " + std::to_string(inputs.cols()) +
                                " columns, weights expect " + std::to_string(w.rows()));
  }
  const Matrix pre = inputs * w;
  return pre.cwiseMax(0.0).rowwise().sum();
}

Dataset generate_dataset(const TeacherSpec& spec, Eigen::Index n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("generate_dataset: N must be >= 1");
  Dataset data;
  data.seed = rng.seed();
  data.nu = spec.nu;
  data.inputs = standard_gaussian_matrix(n, spec.dim(), rng);
  Vector noise(n);
  for (Eigen::Index i = 0; i < n; ++i) noise(i) = spec.nu * rng.gaussian();
  data.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.labels(i) = forward(spec.w_star, data.inputs.row(i).transpose()) + noise(i);
  }
  data.noise = std::move(noise);
  return data;
}

}  // namespace relu_recover
