#pragma once

#include <vector>

#include "relu_recover/numerics.hpp"

namespace relu_recover {

/// Column j of W is matched to column permutation[j] of W*.
struct PermutationMatch {
  std::vector<int> permutation;
  double error = 0.0;           // ||W - W* M_pi||_F
  double relative_error = 0.0;  // error / ||W*||_F
};

/// W* M_pi: column j is column permutation[j] of w_star.
Matrix permute_columns(const Matrix& w_star, const std::vector<int>& permutation);

/// Exact minimizer of ||W - W* M_pi||_F over column permutations, via a
/// Hungarian solve on c_jk = ||w_j - w*_k||^2. Among (numerically) tied
/// minimizers the lexicographically smallest permutation is returned.
PermutationMatch best_permutation_match(const Matrix& w, const Matrix& w_star);

bool is_success(const Matrix& w, const Matrix& w_star, double threshold = 1e-3);

/// Minimum-cost perfect matching on a square cost matrix; returns
/// assignment[row] = column.
std::vector<int> solve_assignment(const Matrix& cost);

}  // namespace relu_recover
