#include "relu_recover/permutation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace relu_recover {

namespace {

double assignment_cost(const Matrix& cost, const std::vector<int>& assignment) {
  double total = 0.0;
  for (std::size_t r = 0; r < assignment.size(); ++r) {
    total += cost(static_cast<Eigen::Index>(r), assignment[r]);
  }
  return total;
}

}  // namespace

std::vector<int> solve_assignment(const Matrix& cost) {
  // Shortest augmenting path with row/column potentials, 1-based internally.
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw std::invalid_argument("solve_assignment: cost must be square");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> col_owner(n + 1, 0), way(n + 1, 0);
  for (int row = 1; row <= n; ++row) {
    col_owner[0] = row;
    int col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const int row0 = col_owner[col0];
      double delta = inf;
      int col1 = 0;
      for (int col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double reduced = cost(row0 - 1, col - 1) - u[row0] - v[col];
        if (reduced < minv[col]) {
          minv[col] = reduced;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (int col = 0; col <= n; ++col) {
        if (used[col]) {
          u[col_owner[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (col_owner[col0] != 0);
    do {
      const int col1 = way[col0];
      col_owner[col0] = col_owner[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int col = 1; col <= n; ++col) assignment[col_owner[col] - 1] = col - 1;
  return assignment;
}

Matrix permute_columns(const Matrix& w_star, const std::vector<int>& permutation) {
  if (static_cast<Eigen::Index>(permutation.size()) != w_star.cols()) {
    throw std::invalid_argument("permute_columns: permutation length mismatch");
  }
  std::vector<bool> seen(permutation.size(), false);
  for (int p : permutation) {
    if (p < 0 || p >= static_cast<int>(permutation.size()) || seen[static_cast<std::size_t>(p)]) {
      throw std::invalid_argument("permute_columns: not a bijection");
    }
    seen[static_cast<std::size_t>(p)] = true;
  }
  Matrix out(w_star.rows(), w_star.cols());
  for (std::size_t j = 0; j < permutation.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = w_star.col(permutation[j]);
  }
  return out;
}

namespace {

// Square root of a sum of per-column squared norms, accumulated in sorted
// order so relabeling the columns cannot change the result.
double column_order_free_norm(std::vector<double> column_sq) {
  std::sort(column_sq.begin(), column_sq.end());
  double total = 0.0;
  for (double v : column_sq) total += v;
  return std::sqrt(total);
}

}  // namespace

PermutationMatch best_permutation_match(const Matrix& w, const Matrix& w_star) {
  if (w.rows() != w_star.rows() || w.cols() != w_star.cols()) {
    throw std::invalid_argument("best_permutation_match: shape mismatch " +
                                std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                                " vs " + std::to_string(w_star.rows()) + "x" +
                                std::to_string(w_star.cols()));
  }
  const Eigen::Index k = w.cols();
  Matrix cost(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index c = 0; c < k; ++c) cost(j, c) = (w.col(j) - w_star.col(c)).squaredNorm();
  }
  const double optimum = assignment_cost(cost, solve_assignment(cost));
  const double tolerance = 1e-12 * (1.0 + optimum);

  // Lexicographic refinement: fix rows in order to the smallest column that
  // still admits an optimal completion.
  std::vector<int> chosen;
  std::vector<char> taken(static_cast<std::size_t>(k), 0);
  double fixed_cost = 0.0;
  for (Eigen::Index row = 0; row < k; ++row) {
    for (Eigen::Index col = 0; col < k; ++col) {
      if (taken[static_cast<std::size_t>(col)]) continue;
      const double with_fixed = fixed_cost + cost(row, col);
      double rest = 0.0;
      const Eigen::Index remaining = k - row - 1;
      if (remaining > 0) {
        Matrix sub(remaining, remaining);
        Eigen::Index sub_c = 0;
        std::vector<Eigen::Index> free_cols;
        for (Eigen::Index c = 0; c < k; ++c) {
          if (!taken[static_cast<std::size_t>(c)] && c != col) free_cols.push_back(c);
        }
        for (Eigen::Index r = 0; r < remaining; ++r) {
          for (sub_c = 0; sub_c < remaining; ++sub_c) {
            sub(r, sub_c) = cost(row + 1 + r, free_cols[static_cast<std::size_t>(sub_c)]);
          }
        }
        rest = assignment_cost(sub, solve_assignment(sub));
      }
      if (with_fixed + rest <= optimum + tolerance) {
        chosen.push_back(static_cast<int>(col));
        taken[static_cast<std::size_t>(col)] = 1;
        fixed_cost = with_fixed;
        break;
      }
    }
  }
  if (static_cast<Eigen::Index>(chosen.size()) != k) {
    // Unreachable unless the assignment solver misbehaves.
    throw std::logic_error("best_permutation_match: refinement failed");
  }

  PermutationMatch match;
  match.permutation = std::move(chosen);
  std::vector<double> residual, reference;
  for (Eigen::Index j = 0; j < k; ++j) {
    residual.push_back(cost(j, match.permutation[static_cast<std::size_t>(j)]));
    reference.push_back(w_star.col(j).squaredNorm());
  }
  match.error = column_order_free_norm(residual);
  const double scale = column_order_free_norm(reference);
  match.relative_error = scale > 0.0 ? match.error / scale : match.error;
  return match;
}

bool is_success(const Matrix& w, const Matrix& w_star, double threshold) {
  return best_permutation_match(w, w_star).relative_error <= threshold;
}

}  // namespace relu_recover
