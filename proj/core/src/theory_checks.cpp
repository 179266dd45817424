#include "relu_recover/theory_checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>

#include "relu_recover/convergence.hpp"
#include "relu_recover/dataset_io.hpp"

namespace relu_recover {

namespace {

void require_local_radius(const TeacherSpec& spec, double radius, const char* op) {
  if (!(radius >= 0.0) || radius > 0.5 * spec.sigma_min()) {
    throw std::invalid_argument(std::string(op) + ": radius must lie in [0, sigma_K / 2]");
  }
}

// Two distinct points of the ball, redrawn until they are >= 1e-3 sigma_K apart.
std::pair<WeightMatrix, WeightMatrix> sample_pair(const TeacherSpec& spec, double radius,
                                                  RngStream& rng) {
  const double min_gap = 1e-3 * spec.sigma_min();
  for (;;) {
    WeightMatrix a = sample_in_ball(spec.w_star, radius, rng);
    WeightMatrix b = sample_in_ball(spec.w_star, radius, rng);
    if ((a - b).norm() >= min_gap) return {std::move(a), std::move(b)};
  }
}

}  // namespace

WeightMatrix sample_on_sphere(const WeightMatrix& center, double radius, RngStream& rng) {
  Matrix direction = standard_gaussian_matrix(center.rows(), center.cols(), rng);
  return center + radius * direction / direction.norm();
}

WeightMatrix sample_in_ball(const WeightMatrix& center, double radius, RngStream& rng) {
  Matrix direction = standard_gaussian_matrix(center.rows(), center.cols(), rng);
  const double scale = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(center.size()));
  return center + scale * direction / direction.norm();
}

StrongConvexityResult check_local_strong_convexity(const TeacherSpec& spec, Eigen::Index n,
                                                   int n_probes, double radius, RngStream& rng) {
  require_local_radius(spec, radius, "check_local_strong_convexity");
  if (n < spec.dim() * spec.width()) {
    throw std::invalid_argument("check_local_strong_convexity: need N >= dK");
  }
  if (n_probes < 1) throw std::invalid_argument("check_local_strong_convexity: n_probes >= 1");

  StrongConvexityResult result;
  result.mu_hat = std::numeric_limits<double>::infinity();
  for (int p = 0; p < n_probes; ++p) {
    const RngStream probe = rng.derive(static_cast<std::uint64_t>(p));
    RngStream direction_rng = probe.derive(0);
    RngStream input_rng = probe.derive(1);
    const WeightMatrix w = radius > 0.0 ? sample_on_sphere(spec.w_star, radius, direction_rng)
                                        : spec.w_star;
    const Matrix inputs = standard_gaussian_matrix(n, spec.dim(), input_rng);
    const BlockMatrix hessian = empirical_hessian(w, inputs);
    const double mu = min_symmetric_eigenvalue(hessian.flat());
    result.per_probe.push_back({"strong_convexity", p, probe.seed(), static_cast<long long>(n),
                                radius, mu});
    if (mu < result.mu_hat) {
      result.mu_hat = mu;
      result.worst_hessian = hessian.flat();
    }
  }
  return result;
}

LipschitzResult lipschitz_probe(const TeacherSpec& spec, int n_pairs, double radius,
                                Eigen::Index n_mc, RngStream& rng) {
  require_local_radius(spec, radius, "lipschitz_probe");
  if (!(radius > 0.0)) throw std::invalid_argument("lipschitz_probe: radius must be > 0");
  if (n_pairs < 1) throw std::invalid_argument("lipschitz_probe: n_pairs >= 1");
  LipschitzResult result;
  for (int p = 0; p < n_pairs; ++p) {
    const RngStream pair_stream = rng.derive(static_cast<std::uint64_t>(p));
    RngStream point_rng = pair_stream.derive(0);
    const auto [w1, w2] = sample_pair(spec, radius, point_rng);
    const RngStream shared = pair_stream.derive(1);
    RngStream mc1 = shared, mc2 = shared;
    const Matrix g1 = population_gradient_mc(w1, spec, n_mc, mc1);
    const Matrix g2 = population_gradient_mc(w2, spec, n_mc, mc2);
    const double ratio = (g1 - g2).norm() / (w1 - w2).norm();
    result.per_pair.push_back({"lipschitz", p, pair_stream.seed(), static_cast<long long>(n_mc),
                               radius, ratio});
    result.l_hat = std::max(result.l_hat, ratio);
  }
  return result;
}

LipschitzResult hessian_lipschitz_probe(const TeacherSpec& spec, int n_pairs, double radius,
                                        Eigen::Index n, RngStream& rng) {
  require_local_radius(spec, radius, "hessian_lipschitz_probe");
  if (!(radius > 0.0)) throw std::invalid_argument("hessian_lipschitz_probe: radius must be > 0");
  if (n_pairs < 1) throw std::invalid_argument("hessian_lipschitz_probe: n_pairs >= 1");
  LipschitzResult result;
  for (int p = 0; p < n_pairs; ++p) {
    const RngStream pair_stream = rng.derive(static_cast<std::uint64_t>(p));
    RngStream point_rng = pair_stream.derive(0);
    RngStream input_rng = pair_stream.derive(1);
    const auto [w1, w2] = sample_pair(spec, radius, point_rng);
    const Matrix inputs = standard_gaussian_matrix(n, spec.dim(), input_rng);
    const Matrix diff = empirical_hessian(w1, inputs).flat() - empirical_hessian(w2, inputs).flat();
    const double spectral =
        std::max(std::abs(max_symmetric_eigenvalue(diff)), std::abs(min_symmetric_eigenvalue(diff)));
    const double ratio = spectral / (w1 - w2).norm();
    result.per_pair.push_back({"hessian_lipschitz", p, pair_stream.seed(),
                               static_cast<long long>(n), radius, ratio});
    result.l_hat = std::max(result.l_hat, ratio);
  }
  return result;
}

ConcentrationResult concentration_sweep(const TeacherSpec& spec, const WeightMatrix& w,
                                        const std::vector<long long>& n_list, int trials,
                                        Eigen::Index n_mc_ref, RngStream& rng) {
  if (w.rows() != spec.dim() || w.cols() != spec.width()) {
    throw std::invalid_argument("concentration_sweep: W shape differs from W*");
  }
  if ((w - spec.w_star).norm() > 0.5 * spec.sigma_min()) {
    throw std::invalid_argument("concentration_sweep: W must lie within sigma_K / 2 of W*");
  }
  const std::set<long long> distinct(n_list.begin(), n_list.end());
  if (distinct.size() < 4 || *distinct.begin() < 1) {
    throw std::invalid_argument("concentration_sweep: need >= 4 distinct positive N values");
  }
  if (static_cast<double>(*distinct.rbegin()) < 10.0 * static_cast<double>(*distinct.begin())) {
    throw std::invalid_argument("concentration_sweep: N values must span at least a decade");
  }
  if (trials < 1) throw std::invalid_argument("concentration_sweep: trials >= 1");

  RngStream ref_rng = rng.derive(0);
  const Matrix reference = population_gradient_mc(w, spec, n_mc_ref, ref_rng);
  const long long n_max = *distinct.rbegin();

  ConcentrationResult result;
  std::vector<double> ns, means;
  for (std::size_t a = 0; a < n_list.size(); ++a) {
    const long long n = n_list[a];
    double total = 0.0;
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t seed = mix_seed(rng.seed(), "concentration",
                                          {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(t)});
      RngStream data_rng(seed);
      const Dataset data = generate_dataset(spec, n, data_rng);
      const double deviation = (empirical_gradient(w, data) - reference).norm();
      result.per_trial.push_back({"concentration_trial", t, seed, n, 0.0, deviation});
      total += deviation;
    }
    ConcentrationRow row{n, trials, total / trials, {}};
    if (static_cast<double>(n_mc_ref) < 10.0 * static_cast<double>(n_max)) {
      row.warning = "n_mc_ref below 10x max N; reference error may bias the slope";
    }
    ns.push_back(static_cast<double>(n));
    means.push_back(row.mean_deviation);
    result.table.push_back(std::move(row));
  }
  const LineFit fit = fit_log_log(ns, means);
  result.slope = fit.slope;
  result.r_squared = fit.r_squared;
  return result;
}

void write_theory_csv(std::ostream& out, const std::vector<ProbeRecord>& rows) {
  out << "check,probe_id,seed,N,radius,value\n";
  for (const auto& r : rows) {
    out << r.check << ',' << r.probe_id << ',' << r.seed << ',' << r.n << ','
        << format_real(r.radius) << ',' << format_real(r.value) << '\n';
  }
}

}  // namespace relu_recover
