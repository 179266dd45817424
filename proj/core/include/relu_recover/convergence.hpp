#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace relu_recover {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;  // 0 when the response has no variance
  std::size_t points = 0;
};

/// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least squares on (log x, log y); all inputs must be positive.
LineFit fit_log_log(std::span<const double> x, std::span<const double> y);

/// Index one past the last point used by the linear-rate fit: the first index
/// whose log10 loss is <= floor_log10 is included; if the floor is never
/// reached the whole curve is used.
std::size_t linear_segment_end(std::span<const double> log10_loss, double floor_log10 = -12.0);

/// Fit of log10(loss) against iteration from the first record up to the
/// floor crossing.
LineFit linear_rate_fit(std::span<const double> iterations, std::span<const double> log10_loss,
                        double floor_log10 = -12.0);

/// Earliest record index s such that the fit over [s, end) has a negative
/// slope, at least `min_points` points, R^2 >= r2_threshold, and every point
/// within `max_residual` decades of the fitted line. Empty when no such
/// segment exists (e.g. the run stalls on a plateau).
std::optional<std::size_t> linear_segment_start(std::span<const double> iterations,
                                                std::span<const double> log10_loss,
                                                double floor_log10 = -12.0,
                                                double r2_threshold = 0.95,
                                                std::size_t min_points = 10,
                                                double max_residual = 0.5);

}  // namespace relu_recover
