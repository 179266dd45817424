#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "relu_recover/relu_recover.hpp"

namespace rr = relu_recover;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream out;
  out.precision(digits);
  out << v;
  return out.str();
}

rr::TeacherSpec reference_teacher(rr::RngStream& rng, double nu = 0.0) {
  return rr::make_ground_truth(10, 5, 1.0, 2.0, rng, nu);
}

// |a - b| / max(1, |a|, |b|) taken entrywise.
double mixed_relative_error(const rr::Matrix& a, const rr::Matrix& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({1.0, std::abs(a.data()[i]), std::abs(b.data()[i])});
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]) / scale);
  }
  return worst;
}

bool clears_kinks(const rr::Matrix& w, const rr::Matrix& x, double margin) {
  const rr::Matrix pre = x * w;
  const rr::Vector norms = x.rowwise().norm();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if ((pre.row(i).array().abs() < margin * norms(i)).any()) return false;
  }
  return true;
}

Outcome gradient_matches_finite_differences() {
  constexpr double h = 1e-6;
  rr::RngStream root(101);
  double worst = 0.0;
  int redraws = 0;
  for (int p = 0; p < 20; ++p) {
    rr::RngStream rng = root.derive(static_cast<std::uint64_t>(p));
    const rr::TeacherSpec spec = reference_teacher(rng, 0.3);
    const rr::Dataset data = rr::generate_dataset(spec, 500, rng);
    rr::Matrix w;
    for (;;) {
      w = p % 2 == 0 ? rr::Matrix(spec.w_star + 0.5 * rr::standard_gaussian_matrix(10, 5, rng))
                     : rr::random_init(10, 5, rng);
      if (clears_kinks(w, data.inputs, 1e-4)) break;
      ++redraws;
    }
    const rr::Matrix g = rr::empirical_gradient(w, data);
    rr::Matrix fd(10, 5);
    for (Eigen::Index r = 0; r < 10; ++r) {
      for (Eigen::Index c = 0; c < 5; ++c) {
        rr::Matrix plus = w, minus = w;
        plus(r, c) += h;
        minus(r, c) -= h;
        fd(r, c) = (rr::empirical_loss(plus, data) - rr::empirical_loss(minus, data)) / (2 * h);
      }
    }
    worst = std::max(worst, mixed_relative_error(g, fd));
  }
  return {worst <= 1e-6, "max relative error " + fmt(worst) + " over 20 points (" +
                             std::to_string(redraws) + " redraws for kink margin)"};
}

Outcome block_identity_matches_gradient() {
  rr::RngStream root(202);
  double worst = 0.0;
  for (int p = 0; p < 20; ++p) {
    rr::RngStream rng = root.derive(static_cast<std::uint64_t>(p));
    const auto d = static_cast<Eigen::Index>(5 + rng.next_u64() % 8);
    const auto k = static_cast<Eigen::Index>(2 + rng.next_u64() % static_cast<std::uint64_t>(std::min<Eigen::Index>(5, d) - 1));
    const auto n = static_cast<Eigen::Index>(100 + rng.next_u64() % 1901);
    const rr::TeacherSpec spec = rr::make_ground_truth(d, k, 1.0, 2.0, rng, 0.5);
    const rr::Dataset data = rr::generate_dataset(spec, n, rng);
    const rr::Matrix w = spec.w_star + rr::standard_gaussian_matrix(d, k, rng);
    const rr::Matrix assembled = rr::omega_hat(w, w, data.inputs).apply(w) -
                                 rr::omega_hat(spec.w_star, w, data.inputs).apply(spec.w_star) -
                                 rr::error_matrix(w, data);
    worst = std::max(worst, rr::frobenius_distance(assembled, rr::empirical_gradient(w, data)));
  }
  return {worst <= 1e-10, "max Frobenius gap " + fmt(worst) + " over 20 instances"};
}

bool within_se(const rr::MonteCarloEstimate& est, const rr::Matrix& expected, double k_se) {
  return ((est.mean - expected).cwiseAbs().array() <= k_se * est.se.array()).all();
}

Outcome population_covariance_sanity() {
  constexpr Eigen::Index n_mc = 1000000;
  rr::RngStream root(303);
  std::vector<std::string> failed;

  rr::RngStream rng_a = root.derive(0);
  const rr::Vector w = rr::standard_gaussian_matrix(5, 1, rng_a).col(0);
  const auto same = rr::population_sigma_mc(w, w, n_mc, rng_a);
  if (!within_se(same, 0.5 * rr::Matrix::Identity(5, 5), 3.0)) failed.push_back("half-identity");

  rr::RngStream rng_b = root.derive(1);
  const auto quad = rr::population_sigma_mc(rr::Vector::Unit(2, 0), rr::Vector::Unit(2, 1), n_mc, rng_b);
  rr::Matrix expected(2, 2);
  expected << 0.25, 0.5 / std::numbers::pi, 0.5 / std::numbers::pi, 0.25;
  if (!within_se(quad, expected, 3.0)) failed.push_back("orthogonal quadrant");

  int wedge_cases = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index d : {2, 5, 10}) {
    for (double theta : {std::numbers::pi / 12, std::numbers::pi / 6, std::numbers::pi / 4,
                         std::numbers::pi / 3, std::numbers::pi / 2}) {
      rr::RngStream rng = root.derive(static_cast<std::uint64_t>(100 + wedge_cases++));
      const rr::Vector u = rr::Vector::Unit(d, 0);
      const rr::Vector u_tilde = std::cos(theta) * rr::Vector::Unit(d, 0) + std::sin(theta) * rr::Vector::Unit(d, 1);
      const auto est = rr::population_sigma_mc(u, -u_tilde, n_mc, rng);
      const double bound = static_cast<double>(d) * theta + 3.0 * est.max_se() * static_cast<double>(d);
      const double lmax = rr::max_symmetric_eigenvalue(est.mean);
      worst_margin = std::min(worst_margin, bound - lmax);
      if (lmax > bound) failed.push_back("wedge d=" + std::to_string(d) + " theta=" + fmt(theta));
    }
  }
  std::string detail = failed.empty() ? "all sub-checks within tolerance" : "failed:";
  for (const auto& f : failed) detail += " " + f;
  detail += "; smallest wedge-bound margin " + fmt(worst_margin);
  return {failed.empty(), detail};
}

std::vector<double> log10_losses(const rr::Trajectory& t) {
  std::vector<double> out;
  for (double v : t.losses) out.push_back(std::log10(std::max(v, 1e-300)));
  return out;
}

std::vector<double> as_doubles(const std::vector<int>& v) { return {v.begin(), v.end()}; }

Outcome fig2a_analog() {
  int recovered = 0, linear_fits = 0, random_later = 0;
  double min_r2 = 1.0;
  std::string entries;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto config = rr::ExperimentConfig::preset(rr::Experiment::fig2a);
    config.master_seed = seed;
    const rr::TrialSetup trial = rr::make_trial(config, config.d, config.n, 0);
    const rr::GDConfig gd = rr::gd_config(config);
    const auto warm = rr::gradient_descent(
        rr::make_init(config, trial.teacher, trial.seed, rr::InitKind::warm), trial.data, gd,
        trial.teacher.w_star);
    const auto random = rr::gradient_descent(
        rr::make_init(config, trial.teacher, trial.seed, rr::InitKind::random), trial.data, gd,
        trial.teacher.w_star);

    if (rr::is_success(warm.final_w, trial.teacher.w_star)) ++recovered;
    const auto warm_it = as_doubles(warm.iterations), random_it = as_doubles(random.iterations);
    const auto warm_ll = log10_losses(warm), random_ll = log10_losses(random);
    const double r2 = rr::linear_rate_fit(warm_it, warm_ll).r_squared;
    min_r2 = std::min(min_r2, r2);
    if (r2 >= 0.95) ++linear_fits;
    const auto ws = rr::linear_segment_start(warm_it, warm_ll);
    const auto rs = rr::linear_segment_start(random_it, random_ll);
    const std::string w_txt = ws ? std::to_string(warm.iterations[*ws]) : "none";
    const std::string r_txt = rs ? std::to_string(random.iterations[*rs]) : "none";
    entries += (seed > 1 ? "," : "") + w_txt + "/" + r_txt;
    if (ws && rs && random.iterations[*rs] > warm.iterations[*ws]) ++random_later;
  }
  const bool pass = recovered >= 9 && linear_fits == 10 && random_later >= 7;
  return {pass, "recovered " + std::to_string(recovered) + "/10, warm fits with R^2>=0.95 " +
                    std::to_string(linear_fits) + "/10 (min " + fmt(min_r2) + "), random enters later " +
                    std::to_string(random_later) + "/10 [warm/random entry: " + entries + "]"};
}

Outcome fig2b_analog() {
  auto config = rr::ExperimentConfig::preset(rr::Experiment::fig2b);
  config.d_list = {20, 50};
  const rr::ResultTable table = rr::run_fig2b(config);
  const std::size_t m = config.ratios.size();
  bool monotone = true, saturated = true;
  std::vector<std::optional<std::size_t>> crossing;
  std::string counts;
  for (std::size_t di = 0; di < config.d_list.size(); ++di) {
    std::vector<int> c;
    for (std::size_t r = 0; r < m; ++r) c.push_back(static_cast<int>(table.number(di * m + r, "success_count")));
    for (std::size_t r = 1; r < m; ++r) monotone &= c[r - 1] - c[r] <= 3;
    saturated &= c.back() == config.trials;
    std::optional<std::size_t> cross;
    for (std::size_t r = 0; r < m && !cross; ++r) {
      if (2 * c[r] >= config.trials) cross = r;
    }
    crossing.push_back(cross);
    counts += " d=" + std::to_string(config.d_list[di]) + ":";
    for (std::size_t r = 0; r < m; ++r) counts += (r ? "," : "") + std::to_string(c[r]);
  }
  const bool collapse = crossing[0] && crossing[1] &&
                        (*crossing[0] > *crossing[1] ? *crossing[0] - *crossing[1] : *crossing[1] - *crossing[0]) <= 1;
  auto cross_txt = [&](std::size_t i) { return crossing[i] ? fmt(config.ratios[*crossing[i]]) : std::string("none"); };
  return {monotone && saturated && collapse,
          std::string("no drop > 3/10: ") + (monotone ? "yes" : "no") + "; 10/10 at largest ratio: " +
              (saturated ? "yes" : "no") + "; 50% crossings at N/d " + cross_txt(0) + " and " + cross_txt(1) +
              " (within one step: " + (collapse ? "yes" : "no") + ");" + counts};
}

Outcome fig2c_analog() {
  auto config = rr::ExperimentConfig::preset(rr::Experiment::fig2c);
  config.d_list = {10, 25};
  const rr::ResultTable table = rr::run_fig2c(config);
  const std::size_t m = config.ratios.size();
  bool slopes_ok = true;
  std::string slopes;
  std::vector<std::vector<double>> errors(2);
  for (std::size_t di = 0; di < 2; ++di) {
    for (std::size_t r = 0; r < m; ++r) errors[di].push_back(table.number(di * m + r, "avg_error"));
    const double slope = rr::fit_log_log(config.ratios, errors[di]).slope;
    slopes_ok &= slope >= -0.65 && slope <= -0.35;
    slopes += " d=" + std::to_string(config.d_list[di]) + " slope " + fmt(slope);
  }
  double worst_ratio = 1.0;
  for (std::size_t r = 0; r < m; ++r) {
    const double hi = std::max(errors[0][r], errors[1][r]), lo = std::min(errors[0][r], errors[1][r]);
    worst_ratio = std::max(worst_ratio, hi / lo);
  }
  const bool band = worst_ratio <= 2.0;
  return {slopes_ok && band, slopes + "; widest gap between curves x" + fmt(worst_ratio)};
}

Outcome strong_convexity_check() {
  const auto config = rr::ExperimentConfig::preset(rr::Experiment::check_theory);
  rr::RngStream teacher_rng(rr::trial_seed(config, config.d, 0, 0));
  const rr::TeacherSpec teacher = rr::make_ground_truth(config.d, config.k, config.sigma_min,
                                                        config.sigma_max, teacher_rng, config.nu);
  const double radius = 0.1 * teacher.sigma_min();
  rr::RngStream a(rr::mix_seed(config.master_seed, "acceptance-convexity", {0}));
  rr::RngStream b(rr::mix_seed(config.master_seed, "acceptance-convexity", {1}));
  const auto first = rr::check_local_strong_convexity(teacher, 100000, 10, radius, a);
  const auto second = rr::check_local_strong_convexity(teacher, 100000, 10, radius, b);
  bool positive = true;
  for (const auto* res : {&first, &second}) {
    for (const auto& p : res->per_probe) positive &= p.value > 0.0;
  }
  const double rel = std::abs(first.mu_hat - second.mu_hat) / std::max(first.mu_hat, second.mu_hat);
  return {positive && rel <= 0.2, "mu_hat " + fmt(first.mu_hat) + " and " + fmt(second.mu_hat) +
                                      ", relative gap " + fmt(rel) + ", every probe positive: " +
                                      (positive ? "yes" : "no")};
}

Outcome concentration_check() {
  const auto config = rr::ExperimentConfig::preset(rr::Experiment::check_theory);
  rr::RngStream teacher_rng(rr::trial_seed(config, config.d, 0, 0));
  const rr::TeacherSpec teacher =
      rr::make_ground_truth(config.d, config.k, config.sigma_min, config.sigma_max, teacher_rng,
                            std::sqrt(0.1));
  rr::RngStream point_rng(rr::mix_seed(config.master_seed, "acceptance-concentration", {0}));
  const rr::WeightMatrix w = rr::sample_on_sphere(teacher.w_star, 0.1 * teacher.sigma_min(), point_rng);
  rr::RngStream rng(rr::mix_seed(config.master_seed, "acceptance-concentration", {1}));
  std::vector<long long> ns;
  for (int e = 10; e <= 16; ++e) ns.push_back(1LL << e);
  const auto res = rr::concentration_sweep(teacher, w, ns, 20, 1000000, rng);
  return {res.slope >= -0.6 && res.slope <= -0.4,
          "slope " + fmt(res.slope) + " (R^2 " + fmt(res.r_squared) + ")"};
}

std::vector<int> exhaustive_best(const rr::Matrix& w, const rr::Matrix& w_star) {
  std::vector<int> perm(static_cast<std::size_t>(w.cols()));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best_perm = perm;
  double best = std::numeric_limits<double>::infinity();
  do {
    double sq = 0.0;
    for (Eigen::Index j = 0; j < w.cols(); ++j) sq += (w.col(j) - w_star.col(perm[static_cast<std::size_t>(j)])).squaredNorm();
    if (sq < best) {
      best = sq;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best_perm;
}

Outcome permutation_oracle() {
  rr::RngStream rng(909);
  int mismatches = 0, total = 0;
  for (Eigen::Index k = 2; k <= 6; ++k) {
    for (int i = 0; i < 100; ++i, ++total) {
      const rr::Matrix w_star = rr::standard_gaussian_matrix(10, k, rng);
      const rr::Matrix w = i % 2 ? rr::Matrix(rr::standard_gaussian_matrix(10, k, rng))
                                 : rr::Matrix(w_star + 0.5 * rr::standard_gaussian_matrix(10, k, rng));
      const auto match = rr::best_permutation_match(w, w_star);
      const auto oracle = exhaustive_best(w, w_star);
      const double oracle_error = rr::frobenius_distance(w, rr::permute_columns(w_star, oracle));
      if (match.permutation != oracle || std::abs(match.error - oracle_error) > 1e-12) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(total - mismatches) + "/" + std::to_string(total) +
                               " instances match the exhaustive search"};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RELU_RECOVER_CLI) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome reproducibility() {
  const fs::path dir = fs::temp_directory_path() / ("relu_recover_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"fig2a", "--seed 7"},
      {"fig2b", "--d-list 10,20 --ratios 10,30 --trials 3 --iters 800 --seed 7"},
      {"fig2c", "--d-list 10 --ratios 20,40,80 --trials 3 --seed 7"},
      {"check-theory", "--theory-n 5000 --probes 3 --pairs 5 --n-mc 20000 --conc-trials 3 "
                       "--n-mc-ref 200000 --conc-n 1024,2048,4096,16384 --hessian-lipschitz true --seed 7"},
      {"train", "--init random --noise-var 0.1 --record-every 5 --seed 7"},
      {"gen-data", "--n 2000 --nu 0.3 --seed 7"},
  };
  std::vector<std::string> failed;
  for (const auto& [sub, flags] : runs) {
    std::string outputs[2];
    bool ok = true;
    for (int rep = 0; rep < 2; ++rep) {
      // Same flags both times, output paths included, since they are echoed.
      const fs::path csv = dir / (sub + ".csv");
      const fs::path svg = dir / (sub + ".svg");
      fs::remove(csv);
      fs::remove(svg);
      const std::string plot = sub == "gen-data" ? "" : " --plot " + svg.string();
      ok &= run_cli(sub + " " + flags + " --out " + csv.string() + plot) == 0;
      outputs[rep] = slurp(csv) + (sub == "gen-data" ? "" : slurp(svg));
    }
    if (!ok || outputs[0].empty() || outputs[0] != outputs[1]) failed.push_back(sub);
  }
  fs::remove_all(dir);
  std::string detail = failed.empty() ? "all 6 subcommands byte-identical (CSV and SVG)" : "differs or failed:";
  for (const auto& f : failed) detail += " " + f;
  return {failed.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient vs central finite differences", gradient_matches_finite_differences},
      {"gradient assembled from block covariances", block_identity_matches_gradient},
      {"population covariance Monte Carlo sanity", population_covariance_sanity},
      {"fig2a: warm start recovery and convergence shape", fig2a_analog},
      {"fig2b: success probability vs N/d", fig2b_analog},
      {"fig2c: estimation error rate vs N/d", fig2c_analog},
      {"local strong convexity near the teacher", strong_convexity_check},
      {"gradient concentration rate", concentration_check},
      {"permutation matching vs exhaustive search", permutation_oracle},
      {"reproducibility of every subcommand", reproducibility},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!outcome.pass) ++failures;
    std::printf("%s %2zu %s: %s [%.1fs]\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), outcome.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
