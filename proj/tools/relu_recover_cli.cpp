// relu-recover: teacher-network recovery experiments from the command line.
//
// Exit codes: 0 success, 1 usage error, 2 numerical divergence, 3 I/O error.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relu_recover/relu_recover.hpp"

namespace rr = relu_recover;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitIo = 3;

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

// Flags map one-to-one onto config keys so that the file and the command line
// share the same parser.
constexpr FlagSpec kFlags[] = {
    {"--d", "d", "input dimension"},
    {"--d-list", "d_list", "comma separated dimensions (fig2b, fig2c)"},
    {"--k", "k", "hidden neurons"},
    {"--n", "n", "sample size"},
    {"--ratios", "ratios", "comma separated N/d grid (fig2b, fig2c)"},
    {"--sigma-min", "sigma_min", "smallest singular value of W*"},
    {"--sigma-max", "sigma_max", "largest singular value of W*"},
    {"--eta", "eta", "step size"},
    {"--iters", "iters", "gradient descent iterations T"},
    {"--grad-tol", "grad_tol", "early stop when ||grad||_F <= tol (0 disables)"},
    {"--record-every", "record_every", "trajectory cadence"},
    {"--nu", "nu", "label-noise standard deviation"},
    {"--noise-var", "noise_var", "label-noise variance (sets nu = sqrt(var))"},
    {"--init", "init", "warm | random"},
    {"--warm-radius", "warm_radius", "warm-start radius in units of sigma_K"},
    {"--trials", "trials", "trials per grid cell"},
    {"--seed", "master_seed", "master seed"},
    {"--theory-n", "theory_n", "sample size for Hessian probes"},
    {"--probes", "probes", "strong-convexity probes"},
    {"--probe-radius", "probe_radius", "probe radius in units of sigma_K"},
    {"--pairs", "lipschitz_pairs", "Lipschitz probe pairs"},
    {"--n-mc", "n_mc", "Monte Carlo samples per population gradient"},
    {"--n-mc-ref", "n_mc_ref", "Monte Carlo samples for the concentration reference"},
    {"--conc-trials", "conc_trials", "trials per N in the concentration sweep"},
    {"--conc-n", "conc_n", "comma separated N values for the concentration sweep"},
    {"--hessian-lipschitz", "hessian_lipschitz", "also probe the Hessian Lipschitz constant (true/false)"},
    {"--data", "data", "train: load this dataset instead of generating one"},
    {"--out", "out", "output CSV path (stdout when omitted)"},
    {"--plot", "plot", "also write an SVG plot to this path"},
};

struct Command {
  rr::Experiment experiment;
  CLI::App* app = nullptr;
  std::string config_file;
  std::map<std::string, std::string> values;
};

void write_table(const rr::ResultTable& table, const rr::ExperimentConfig& config) {
  if (config.out_path.empty()) {
    table.write_csv(std::cout);
  } else {
    table.save(config.out_path);
  }
  if (!config.plot_path.empty()) {
    const auto kind = config.experiment == rr::Experiment::check_theory ? rr::PlotKind::scatter
                                                                         : rr::PlotKind::line;
    std::ofstream svg(config.plot_path, std::ios::binary);
    if (!svg) throw rr::IoError("cannot open '" + config.plot_path + "' for writing");
    svg << rr::emit_plot(table, kind);
    if (!svg) throw rr::IoError("write to '" + config.plot_path + "' failed");
  }
}

int run(const Command& cmd) {
  rr::ExperimentConfig config = rr::ExperimentConfig::preset(cmd.experiment);
  if (!cmd.config_file.empty()) rr::apply_config_file(config, cmd.config_file);
  config.experiment = cmd.experiment;
  for (const auto& [key, value] : cmd.values) config.set(key, value);
  config.validate();

  if (cmd.experiment == rr::Experiment::gen_data) {
    const rr::Dataset data = rr::run_gen_data(config);
    const auto preamble = rr::provenance_lines(config);
    if (config.out_path.empty()) {
      rr::write_dataset_csv(std::cout, data, preamble);
    } else {
      rr::save_dataset(config.out_path, data, preamble);
    }
    return kExitOk;
  }

  const rr::ResultTable table = rr::run_experiment(config);
  write_table(table, config);
  if (table.diverged) {
    for (const auto& note : table.notes) std::cerr << "relu-recover: " << note << '\n';
    return kExitDivergence;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-descent recovery of one-hidden-layer ReLU teacher networks"};
  app.require_subcommand(1);

  const std::pair<rr::Experiment, const char*> subcommands[] = {
      {rr::Experiment::fig2a, "warm-start vs random-init convergence curves"},
      {rr::Experiment::fig2b, "success probability vs N/d (noiseless)"},
      {rr::Experiment::fig2c, "average estimation error vs N/d (noisy)"},
      {rr::Experiment::check_theory, "Hessian floor, gradient Lipschitz and concentration probes"},
      {rr::Experiment::train, "single gradient-descent run with trajectory output"},
      {rr::Experiment::gen_data, "write a synthetic dataset"},
  };

  std::vector<Command> commands(std::size(subcommands));
  for (std::size_t i = 0; i < commands.size(); ++i) {
    auto& cmd = commands[i];
    cmd.experiment = subcommands[i].first;
    cmd.app = app.add_subcommand(rr::to_string(cmd.experiment), subcommands[i].second);
    cmd.app->add_option("--config", cmd.config_file, "key = value config file; flags override it");
    for (const auto& f : kFlags) {
      cmd.app->add_option_function<std::string>(
          f.flag, [&cmd, key = std::string(f.key)](const std::string& v) { cmd.values[key] = v; },
          f.help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (const auto& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    try {
      return run(cmd);
    } catch (const rr::UsageError& e) {
      std::cerr << "relu-recover: " << e.what() << '\n';
      return kExitUsage;
    } catch (const rr::IoError& e) {
      std::cerr << "relu-recover: " << e.what() << '\n';
      return kExitIo;
    } catch (const rr::DivergenceError& e) {
      std::cerr << "relu-recover: " << e.what() << '\n';
      return kExitDivergence;
    } catch (const std::invalid_argument& e) {
      std::cerr << "relu-recover: " << e.what() << '\n';
      return kExitUsage;
    } catch (const std::exception& e) {
      std::cerr << "relu-recover: " << e.what() << '\n';
      return kExitUsage;
    }
  }
  return kExitUsage;
}
