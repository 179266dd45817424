#include "relu_recover/training.hpp"

#include <cmath>
#include <ostream>

#include "relu_recover/dataset_io.hpp"
#include "relu_recover/permutation.hpp"

namespace relu_recover {

void GDConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("GDConfig: eta must be > 0");
  if (max_iters < 1) throw std::invalid_argument("GDConfig: max_iters must be >= 1");
  if (record_every < 1) throw std::invalid_argument("GDConfig: record_every must be >= 1");
  if (!(grad_tol >= 0.0)) throw std::invalid_argument("GDConfig: grad_tol must be >= 0");
}

std::string to_string(StopReason reason) {
  return reason == StopReason::grad_tol ? "grad_tol" : "max_iters";
}

DivergenceError::DivergenceError(int iteration, WeightMatrix last_finite, Trajectory partial)
    : std::runtime_error("gradient descent diverged at iteration " + std::to_string(iteration)),
      iteration_(iteration),
      last_finite_(std::move(last_finite)),
      partial_(std::move(partial)) {}

WeightMatrix warm_start_init(const TeacherSpec& spec, double radius, RngStream& rng) {
  if (!(radius > 0.0)) throw std::invalid_argument("warm_start_init: radius must be > 0");
  Matrix direction = standard_gaussian_matrix(spec.dim(), spec.width(), rng);
  direction /= direction.norm();
  return spec.w_star + radius * direction;
}

WeightMatrix random_init(Eigen::Index d, Eigen::Index k, RngStream& rng) {
  if (k < 1 || k > d) throw std::invalid_argument("random_init: need 1 <= K <= d");
  return standard_gaussian_matrix(d, k, rng);
}

Trajectory gradient_descent(const WeightMatrix& w0, const Dataset& data, const GDConfig& config,
                            const std::optional<WeightMatrix>& w_star) {
  config.validate();
  if (w0.rows() != data.dim()) {
    throw std::invalid_argument("gradient_descent: W0 has " + std::to_string(w0.rows()) +
                                " rows, data has dimension " + std::to_string(data.dim()));
  }
  if (w_star && (w_star->rows() != w0.rows() || w_star->cols() != w0.cols())) {
    throw std::invalid_argument("gradient_descent: W* shape differs from W0");
  }

  Trajectory traj;
  WeightMatrix w = w0;
  WeightMatrix last_finite = w0;
  for (int t = 0;; ++t) {
    const LossAndGradient lg = empirical_loss_and_gradient(w, data);
    const double grad_norm = lg.gradient.norm();
    if (!std::isfinite(lg.loss) || !std::isfinite(grad_norm)) {
      traj.final_w = last_finite;
      throw DivergenceError(t, last_finite, std::move(traj));
    }
    last_finite = w;

    const bool tol_hit = config.grad_tol > 0.0 && grad_norm <= config.grad_tol;
    const bool last = tol_hit || t == config.max_iters;
    if (last || t % config.record_every == 0) {
      traj.iterations.push_back(t);
      traj.losses.push_back(lg.loss);
      traj.grad_norms.push_back(grad_norm);
      if (w_star) traj.param_errors.push_back(best_permutation_match(w, *w_star).relative_error);
    }
    if (last) {
      traj.stop_reason = tol_hit ? StopReason::grad_tol : StopReason::max_iters;
      break;
    }
    w.noalias() -= config.eta * lg.gradient;
  }
  traj.final_w = std::move(w);
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "iter,loss,grad_norm,param_error\n";
  const bool with_error = !trajectory.param_errors.empty();
  for (std::size_t i = 0; i < trajectory.iterations.size(); ++i) {
    out << trajectory.iterations[i] << ',' << format_real(trajectory.losses[i]) << ','
        << format_real(trajectory.grad_norms[i]) << ',';
    if (with_error) out << format_real(trajectory.param_errors[i]);
    out << '\n';
  }
}

}  // namespace relu_recover
