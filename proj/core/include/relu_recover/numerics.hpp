#pragma once

#include <Eigen/Dense>

#include "relu_recover/rng.hpp"

namespace relu_recover {

/// Dense 64-bit matrix. Storage is Eigen's column-major layout, so
/// `Eigen::Map<const Vector>(W.data(), W.size())` is vec(W) with columns
/// stacked.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// d x K matrix whose column j is the weight vector of hidden neuron j.
using WeightMatrix = Matrix;

/// Entries drawn row by row (row 0 left to right, then row 1, ...).
Matrix standard_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng);

struct OrthonormalFactors {
  Matrix u;                 // d x K, orthonormal columns
  Matrix v;                 // K x K, orthogonal
  Vector singular_values;   // of `source`, descending
  Matrix source;            // the d x K Gaussian matrix that was factored
};

/// Thin SVD factors of a d x K standard Gaussian matrix.
OrthonormalFactors orthonormal_factors(Eigen::Index d, Eigen::Index k, RngStream& rng);

/// Extreme eigenvalues of a symmetric matrix. The input is symmetrized as
/// (S + S^T) / 2 before the solve.
double min_symmetric_eigenvalue(const Matrix& s);
double max_symmetric_eigenvalue(const Matrix& s);

double frobenius_distance(const Matrix& a, const Matrix& b);

/// Throws std::domain_error naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

inline Eigen::Map<const Vector> vec(const Matrix& m) {
  return {m.data(), m.size()};
}

}  // namespace relu_recover
