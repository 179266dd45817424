#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relu_recover/objective.hpp"
#include "relu_recover/teacher.hpp"

namespace relu_recover {

struct GDConfig {
  double eta = 0.5;
  int max_iters = 1000;
  double grad_tol = 0.0;  // stop once ||grad||_F <= grad_tol; 0 disables
  int record_every = 1;

  /// Throws std::invalid_argument on eta <= 0, max_iters < 1, record_every < 1
  /// or grad_tol < 0.
  void validate() const;
};

enum class StopReason { max_iters, grad_tol };

std::string to_string(StopReason reason);

struct Trajectory {
  std::vector<int> iterations;
  std::vector<double> losses;
  std::vector<double> grad_norms;
  std::vector<double> param_errors;  // relative, permutation matched; empty without W*
  WeightMatrix final_w;
  StopReason stop_reason = StopReason::max_iters;
};

/// Loss or gradient became non-finite. Carries the partial trajectory and the
/// last iterate whose loss and gradient were finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int iteration, WeightMatrix last_finite, Trajectory partial);

  int iteration() const noexcept { return iteration_; }
  const WeightMatrix& last_finite() const noexcept { return last_finite_; }
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  int iteration_;
  WeightMatrix last_finite_;
  Trajectory partial_;
};

/// W* + radius * D / ||D||_F with D a standard Gaussian d x K matrix.
/// Stands in for tensor initialization. radius must be > 0.
WeightMatrix warm_start_init(const TeacherSpec& spec, double radius, RngStream& rng);

WeightMatrix random_init(Eigen::Index d, Eigen::Index k, RngStream& rng);

/// Fixed-step full-batch gradient descent, W^t = W^{t-1} - eta * grad(W^{t-1}).
/// Records iteration 0, every `record_every`-th iterate and the final iterate.
Trajectory gradient_descent(const WeightMatrix& w0, const Dataset& data, const GDConfig& config,
                            const std::optional<WeightMatrix>& w_star = std::nullopt);

/// Columns iter,loss,grad_norm,param_error; param_error is empty when the
/// trajectory carries no parameter errors.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace relu_recover
