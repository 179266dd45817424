#include "relu_recover/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "relu_recover/convergence.hpp"
#include "relu_recover/dataset_io.hpp"
#include "relu_recover/errors.hpp"
#include "relu_recover/permutation.hpp"
#include "relu_recover/theory_checks.hpp"

namespace relu_recover {

namespace {

constexpr const char* kWarmLabel = "warm-start (tensor-init surrogate)";

std::string log10_cell(double loss) { return format_real(std::log10(loss)); }

long long grid_n(int d, double ratio) { return std::llround(ratio * d); }

// Outcome of one GD run; diverged runs keep their last finite iterate.
struct RunOutcome {
  Trajectory trajectory;
  bool diverged = false;
  int diverged_at = -1;
};

RunOutcome run_gd(const WeightMatrix& w0, const Dataset& data, const GDConfig& gd,
                  const std::optional<WeightMatrix>& w_star = std::nullopt) {
  RunOutcome out;
  try {
    out.trajectory = gradient_descent(w0, data, gd, w_star);
  } catch (const DivergenceError& e) {
    out.trajectory = e.partial();
    out.trajectory.final_w = e.last_finite();
    out.diverged = true;
    out.diverged_at = e.iteration();
  }
  return out;
}

std::string init_label(InitKind kind) {
  return kind == InitKind::warm ? kWarmLabel : "random Gaussian";
}

}  // namespace

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t trial_seed(const ExperimentConfig& config, long long d, long long n, long long trial) {
  return mix_seed(config.master_seed, to_string(config.experiment),
                  {static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(n),
                   static_cast<std::uint64_t>(trial)});
}

TrialSetup make_trial(const ExperimentConfig& config, int d, long long n, long long trial) {
  TrialSetup setup;
  setup.seed = trial_seed(config, d, n, trial);
  const RngStream root(setup.seed);
  RngStream teacher_rng = root.derive(0);
  RngStream data_rng = root.derive(1);
  setup.teacher = make_ground_truth(d, config.k, config.sigma_min, config.sigma_max, teacher_rng,
                                    config.nu);
  setup.data = generate_dataset(setup.teacher, n, data_rng);
  return setup;
}

WeightMatrix make_init(const ExperimentConfig& config, const TeacherSpec& teacher,
                       std::uint64_t seed, InitKind kind) {
  const RngStream root(seed);
  if (kind == InitKind::warm) {
    RngStream rng = root.derive(2);
    return warm_start_init(teacher, config.warm_radius * teacher.sigma_min(), rng);
  }
  RngStream rng = root.derive(3);
  return random_init(teacher.dim(), teacher.width(), rng);
}

GDConfig gd_config(const ExperimentConfig& config) {
  GDConfig gd;
  gd.eta = config.eta;
  gd.max_iters = config.iters;
  gd.grad_tol = config.grad_tol;
  gd.record_every = config.record_every;
  return gd;
}

ResultTable run_fig2a(const ExperimentConfig& config) {
  config.validate();
  ResultTable table;
  table.config = config;
  table.schema = {"iter", "log10_loss_warm", "log10_loss_random"};

  const TrialSetup trial = make_trial(config, config.d, config.n, 0);
  const GDConfig gd = gd_config(config);
  RunOutcome runs[2];
  const InitKind kinds[2] = {InitKind::warm, InitKind::random};
  parallel_for(2, [&](std::size_t i) {
    runs[i] = run_gd(make_init(config, trial.teacher, trial.seed, kinds[i]), trial.data, gd);
  });

  table.notes.push_back("log10_loss_warm: " + std::string(kWarmLabel));
  table.notes.push_back("log10_loss_random: random Gaussian init");
  for (int i = 0; i < 2; ++i) {
    if (runs[i].diverged) {
      table.diverged = true;
      table.notes.push_back(std::string(i == 0 ? "warm" : "random") + " curve diverged at iteration " +
                            std::to_string(runs[i].diverged_at));
    }
  }
  // Union of recorded iterations, in order.
  std::vector<int> iters;
  for (const auto& r : runs) iters.insert(iters.end(), r.trajectory.iterations.begin(), r.trajectory.iterations.end());
  std::sort(iters.begin(), iters.end());
  iters.erase(std::unique(iters.begin(), iters.end()), iters.end());
  std::size_t cursor[2] = {0, 0};
  for (int it : iters) {
    std::vector<std::string> row{std::to_string(it)};
    for (int i = 0; i < 2; ++i) {
      const auto& tr = runs[i].trajectory;
      if (cursor[i] < tr.iterations.size() && tr.iterations[cursor[i]] == it) {
        row.push_back(log10_cell(tr.losses[cursor[i]]));
        ++cursor[i];
      } else {
        row.emplace_back();
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

ResultTable run_fig2b(const ExperimentConfig& config) {
  config.validate();
  ResultTable table;
  table.config = config;
  table.schema = {"d", "N", "ratio", "success_count", "trials"};
  table.notes.push_back("init: " + init_label(config.init));
  table.notes.push_back("success: permutation-matched relative error <= 1e-3");

  const std::size_t cells = config.d_list.size() * config.ratios.size();
  const std::size_t jobs = cells * static_cast<std::size_t>(config.trials);
  std::vector<char> success(jobs, 0), diverged(jobs, 0);
  const GDConfig gd = gd_config(config);
  parallel_for(jobs, [&](std::size_t job) {
    const std::size_t cell = job / config.trials;
    const int t = static_cast<int>(job % config.trials);
    const int d = config.d_list[cell / config.ratios.size()];
    const long long n = grid_n(d, config.ratios[cell % config.ratios.size()]);
    const TrialSetup trial = make_trial(config, d, n, t);
    const RunOutcome run =
        run_gd(make_init(config, trial.teacher, trial.seed, config.init), trial.data, gd);
    diverged[job] = run.diverged;
    success[job] = !run.diverged && is_success(run.trajectory.final_w, trial.teacher.w_star, 1e-3);
  });

  for (std::size_t cell = 0; cell < cells; ++cell) {
    const int d = config.d_list[cell / config.ratios.size()];
    const double ratio = config.ratios[cell % config.ratios.size()];
    int count = 0, div = 0;
    for (int t = 0; t < config.trials; ++t) {
      count += success[cell * config.trials + t];
      div += diverged[cell * config.trials + t];
    }
    if (div > 0) {
      table.notes.push_back("d=" + std::to_string(d) + " ratio=" + format_real(ratio) + ": " +
                            std::to_string(div) + " diverged trial(s) counted as failures");
    }
    table.rows.push_back({std::to_string(d), std::to_string(grid_n(d, ratio)), format_real(ratio),
                          std::to_string(count), std::to_string(config.trials)});
  }
  return table;
}

ResultTable run_fig2c(const ExperimentConfig& config) {
  config.validate();
  ResultTable table;
  table.config = config;
  table.schema = {"d", "N", "ratio", "avg_error"};
  table.notes.push_back("init: " + init_label(config.init));
  table.notes.push_back("avg_error: mean over trials of ||W^T - W* M_pi||_F");

  const std::size_t cells = config.d_list.size() * config.ratios.size();
  const std::size_t jobs = cells * static_cast<std::size_t>(config.trials);
  std::vector<double> errors(jobs, 0.0);
  std::vector<char> diverged(jobs, 0);
  const GDConfig gd = gd_config(config);
  parallel_for(jobs, [&](std::size_t job) {
    const std::size_t cell = job / config.trials;
    const int t = static_cast<int>(job % config.trials);
    const int d = config.d_list[cell / config.ratios.size()];
    const long long n = grid_n(d, config.ratios[cell % config.ratios.size()]);
    const TrialSetup trial = make_trial(config, d, n, t);
    const RunOutcome run =
        run_gd(make_init(config, trial.teacher, trial.seed, config.init), trial.data, gd);
    diverged[job] = run.diverged;
    errors[job] = best_permutation_match(run.trajectory.final_w, trial.teacher.w_star).error;
  });

  for (std::size_t cell = 0; cell < cells; ++cell) {
    const int d = config.d_list[cell / config.ratios.size()];
    const double ratio = config.ratios[cell % config.ratios.size()];
    double total = 0.0;
    int div = 0;
    for (int t = 0; t < config.trials; ++t) {
      total += errors[cell * config.trials + t];
      div += diverged[cell * config.trials + t];
    }
    if (div > 0) {
      table.diverged = true;
      table.notes.push_back("d=" + std::to_string(d) + " ratio=" + format_real(ratio) + ": " +
                            std::to_string(div) + " diverged trial(s); error taken at last finite iterate");
    }
    table.rows.push_back({std::to_string(d), std::to_string(grid_n(d, ratio)), format_real(ratio),
                          format_real(total / config.trials)});
  }
  return table;
}

ResultTable run_check_theory(const ExperimentConfig& config) {
  config.validate();
  ResultTable table;
  table.config = config;
  table.schema = {"check", "probe_id", "seed", "N", "radius", "value"};

  RngStream teacher_rng(trial_seed(config, config.d, 0, 0));
  const TeacherSpec teacher =
      make_ground_truth(config.d, config.k, config.sigma_min, config.sigma_max, teacher_rng, config.nu);
  const double radius = config.probe_radius * teacher.sigma_min();
  const RngStream root(mix_seed(config.master_seed, "check-theory-probes", {}));

  std::vector<ProbeRecord> rows;
  auto summary = [&](const std::string& name, long long n, double value) {
    rows.push_back({name, -1, root.seed(), n, radius, value});
  };
  auto record_failure = [&](const std::string& name, const std::exception& e) {
    rows.push_back({"error:" + name, -1, root.seed(), 0, radius,
                    std::numeric_limits<double>::quiet_NaN()});
    table.notes.push_back(name + " failed: " + e.what());
  };

  try {
    RngStream rng = root.derive(1);
    const auto sc = check_local_strong_convexity(teacher, config.theory_n, config.probes,
                                                 std::min(radius, 0.5 * teacher.sigma_min()), rng);
    rows.insert(rows.end(), sc.per_probe.begin(), sc.per_probe.end());
    summary("mu_hat", config.theory_n, sc.mu_hat);
  } catch (const std::exception& e) {
    record_failure("strong_convexity", e);
  }
  try {
    RngStream rng = root.derive(2);
    const auto lp = lipschitz_probe(teacher, config.lipschitz_pairs, radius, config.n_mc, rng);
    rows.insert(rows.end(), lp.per_pair.begin(), lp.per_pair.end());
    summary("L_hat", config.n_mc, lp.l_hat);
  } catch (const std::exception& e) {
    record_failure("lipschitz", e);
  }
  try {
    RngStream point_rng = root.derive(3);
    const WeightMatrix w = sample_on_sphere(teacher.w_star, radius, point_rng);
    RngStream rng = root.derive(4);
    const auto cs = concentration_sweep(teacher, w, config.conc_n, config.conc_trials,
                                        config.n_mc_ref, rng);
    for (std::size_t i = 0; i < cs.table.size(); ++i) {
      rows.push_back({"concentration", static_cast<int>(i), rng.seed(), cs.table[i].n, radius,
                      cs.table[i].mean_deviation});
      if (!cs.table[i].warning.empty() && i == 0) table.notes.push_back(cs.table[i].warning);
    }
    summary("concentration_slope", config.n_mc_ref, cs.slope);
  } catch (const std::exception& e) {
    record_failure("concentration", e);
  }
  if (config.hessian_lipschitz) {
    try {
      RngStream rng = root.derive(5);
      const auto hp = hessian_lipschitz_probe(teacher, config.lipschitz_pairs, radius,
                                              config.theory_n, rng);
      rows.insert(rows.end(), hp.per_pair.begin(), hp.per_pair.end());
      summary("rho_hat", config.theory_n, hp.l_hat);
    } catch (const std::exception& e) {
      record_failure("hessian_lipschitz", e);
    }
  }

  for (const auto& r : rows) {
    table.rows.push_back({r.check, std::to_string(r.probe_id), std::to_string(r.seed),
                          std::to_string(r.n), format_real(r.radius), format_real(r.value)});
  }
  return table;
}

ResultTable run_train(const ExperimentConfig& config) {
  config.validate();
  ResultTable table;
  table.config = config;
  table.schema = {"iter", "loss", "grad_norm", "param_error"};

  Dataset data;
  std::optional<TeacherSpec> teacher;
  std::uint64_t seed = trial_seed(config, config.d, config.n, 0);
  if (!config.data_path.empty()) {
    data = load_dataset(config.data_path);
    if (config.init == InitKind::warm) {
      throw UsageError("train: warm init needs W*; use --init random with --data");
    }
    if (data.dim() < config.k) throw UsageError("train: dataset dimension is smaller than k");
    table.notes.push_back("dataset loaded from " + config.data_path + "; W* unknown");
  } else {
    TrialSetup trial = make_trial(config, config.d, config.n, 0);
    data = std::move(trial.data);
    teacher = std::move(trial.teacher);
  }
  table.notes.push_back("init: " + init_label(config.init));

  WeightMatrix w0;
  if (teacher) {
    w0 = make_init(config, *teacher, seed, config.init);
  } else {
    RngStream rng = RngStream(seed).derive(3);
    w0 = random_init(data.dim(), config.k, rng);
  }
  const RunOutcome run = run_gd(w0, data, gd_config(config),
                                teacher ? std::optional<WeightMatrix>(teacher->w_star) : std::nullopt);
  if (run.diverged) {
    table.diverged = true;
    table.notes.push_back("diverged at iteration " + std::to_string(run.diverged_at));
  }
  table.notes.push_back("stop_reason: " + to_string(run.trajectory.stop_reason));
  const auto& tr = run.trajectory;
  for (std::size_t i = 0; i < tr.iterations.size(); ++i) {
    table.rows.push_back({std::to_string(tr.iterations[i]), format_real(tr.losses[i]),
                          format_real(tr.grad_norms[i]),
                          tr.param_errors.empty() ? std::string() : format_real(tr.param_errors[i])});
  }
  return table;
}

Dataset run_gen_data(const ExperimentConfig& config) {
  config.validate();
  return make_trial(config, config.d, config.n, 0).data;
}

ResultTable run_experiment(const ExperimentConfig& config) {
  switch (config.experiment) {
    case Experiment::fig2a: return run_fig2a(config);
    case Experiment::fig2b: return run_fig2b(config);
    case Experiment::fig2c: return run_fig2c(config);
    case Experiment::check_theory: return run_check_theory(config);
    case Experiment::train: return run_train(config);
    case Experiment::gen_data: break;
  }
  throw UsageError("run_experiment: gen-data produces a dataset, not a result table");
}

}  // namespace relu_recover
