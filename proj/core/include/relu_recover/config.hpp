#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace relu_recover {

enum class Experiment { fig2a, fig2b, fig2c, check_theory, train, gen_data };
enum class InitKind { warm, random };

std::string to_string(Experiment e);
std::string to_string(InitKind k);
Experiment parse_experiment(std::string_view name);
InitKind parse_init(std::string_view name);

/// Everything needed to rerun an experiment. Radii are in units of sigma_K.
struct ExperimentConfig {
  Experiment experiment = Experiment::train;

  int d = 10;
  std::vector<int> d_list;  // fig2b / fig2c grid
  int k = 5;
  long long n = 5000;
  std::vector<double> ratios;  // N/d grid for fig2b / fig2c
  double sigma_min = 1.0;
  double sigma_max = 2.0;
  double nu = 0.0;  // label-noise standard deviation

  double eta = 0.5;
  int iters = 1000;
  double grad_tol = 0.0;
  int record_every = 1;
  InitKind init = InitKind::warm;
  double warm_radius = 0.2;

  int trials = 10;
  std::uint64_t master_seed = 1;

  // check-theory
  long long theory_n = 100000;
  int probes = 10;
  double probe_radius = 0.1;
  int lipschitz_pairs = 50;
  long long n_mc = 100000;
  int conc_trials = 20;
  long long n_mc_ref = 1000000;
  std::vector<long long> conc_n;
  bool hessian_lipschitz = false;

  std::string data_path;  // train: optional dataset to load instead of generating
  std::string out_path;
  std::string plot_path;

  /// Defaults for one experiment.
  static ExperimentConfig preset(Experiment e);

  /// Assigns one `key = value` pair; throws UsageError on unknown key or bad value.
  void set(std::string_view key, std::string_view value);

  /// Ordered `key = value` lines covering every field.
  std::vector<std::string> to_lines() const;

  /// Throws UsageError describing the first invalid field.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Applies a plain-text config file: `key = value` lines, `#` comments.
void apply_config_text(ExperimentConfig& config, std::istream& in);
void apply_config_file(ExperimentConfig& config, const std::string& path);

/// Recovers the config echoed into an output file's `#` preamble.
ExperimentConfig parse_config_echo(std::istream& in);

inline constexpr std::string_view kConfigBegin = "config begin";
inline constexpr std::string_view kConfigEnd = "config end";

}  // namespace relu_recover
