#include "relu_recover/convergence.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace relu_recover {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: x and y differ in length");
  // Centre first; iteration counts and log losses are far from zero.
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return LineFit{0.0, x.empty() ? 0.0 : my / n, 0.0, x.size()};
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LineFit out;
  out.points = x.size();
  if (sxx <= 0.0) {
    out.intercept = my;
    return out;
  }
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 0.0;
  return out;
}

LineFit fit_log_log(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_log_log: x and y differ in length");
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::invalid_argument("fit_log_log: inputs must be positive");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly);
}

std::size_t linear_segment_end(std::span<const double> log10_loss, double floor_log10) {
  for (std::size_t i = 0; i < log10_loss.size(); ++i) {
    if (log10_loss[i] <= floor_log10) return i + 1;
  }
  return log10_loss.size();
}

LineFit linear_rate_fit(std::span<const double> iterations, std::span<const double> log10_loss,
                        double floor_log10) {
  if (iterations.size() != log10_loss.size()) {
    throw std::invalid_argument("linear_rate_fit: length mismatch");
  }
  const std::size_t end = linear_segment_end(log10_loss, floor_log10);
  return fit_line(iterations.first(end), log10_loss.first(end));
}

std::optional<std::size_t> linear_segment_start(std::span<const double> iterations,
                                                std::span<const double> log10_loss,
                                                double floor_log10, double r2_threshold,
                                                std::size_t min_points, double max_residual) {
  if (iterations.size() != log10_loss.size()) {
    throw std::invalid_argument("linear_segment_start: length mismatch");
  }
  const std::size_t end = linear_segment_end(log10_loss, floor_log10);
  if (end < min_points) return std::nullopt;
  for (std::size_t i = 0; i < end; ++i) {
    if (!std::isfinite(log10_loss[i])) return std::nullopt;
  }
  for (std::size_t s = 0; s + min_points <= end; ++s) {
    const auto xs = iterations.subspan(s, end - s);
    const auto ys = log10_loss.subspan(s, end - s);
    const LineFit f = fit_line(xs, ys);
    if (!(f.slope < 0.0) || f.r_squared < r2_threshold) continue;
    bool inside = true;
    for (std::size_t i = 0; i < xs.size() && inside; ++i) {
      inside = std::abs(ys[i] - (f.slope * xs[i] + f.intercept)) <= max_residual;
    }
    if (inside) return s;
  }
  return std::nullopt;
}

}  // namespace relu_recover
