#include "relu_recover/numerics.hpp"

#include <stdexcept>
#include <string>

namespace relu_recover {

namespace {

Eigen::VectorXd symmetric_spectrum(const Matrix& s) {
  if (s.rows() != s.cols() || s.rows() == 0) {
    throw std::invalid_argument("symmetric eigenvalue: matrix must be square and non-empty, got " +
                                std::to_string(s.rows()) + "x" + std::to_string(s.cols()));
  }
  require_finite(s, "symmetric eigenvalue input");
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigenvalue: solver did not converge");
  }
  return solver.eigenvalues();  // ascending
}

}  // namespace

Matrix standard_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("standard_gaussian_matrix: dimensions must be positive, got " +
                                std::to_string(rows) + "x" + std::to_string(cols));
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
  }
  return m;
}

OrthonormalFactors orthonormal_factors(Eigen::Index d, Eigen::Index k, RngStream& rng) {
  if (k < 1 || k > d) {
    throw std::invalid_argument("orthonormal_factors: need 1 <= K <= d, got d=" + std::to_string(d) +
                                ", K=" + std::to_string(k));
  }
  OrthonormalFactors out;
  out.source = standard_gaussian_matrix(d, k, rng);
  Eigen::JacobiSVD<Matrix> svd(out.source, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.u = svd.matrixU();
  out.v = svd.matrixV();
  out.singular_values = svd.singularValues();
  return out;
}

double min_symmetric_eigenvalue(const Matrix& s) { return symmetric_spectrum(s)(0); }

double max_symmetric_eigenvalue(const Matrix& s) {
  const auto ev = symmetric_spectrum(s);
  return ev(ev.size() - 1);
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("frobenius_distance: shape mismatch " + std::to_string(a.rows()) +
                                "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                "x" + std::to_string(b.cols()));
  }
  return (a - b).norm();
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::domain_error(std::string(what) + ": non-finite entry");
}

}  // namespace relu_recover
