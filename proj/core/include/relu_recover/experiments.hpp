#pragma once

#include <cstdint>
#include <functional>

#include "relu_recover/config.hpp"
#include "relu_recover/result_table.hpp"
#include "relu_recover/teacher.hpp"
#include "relu_recover/training.hpp"

namespace relu_recover {

/// Seed of one trial: hash(master_seed, experiment, d, N, trial_index).
std::uint64_t trial_seed(const ExperimentConfig& config, long long d, long long n, long long trial);

/// Per-trial draws. Teacher, dataset and initializer use separate sub-streams
/// of the trial seed.
struct TrialSetup {
  TeacherSpec teacher;
  Dataset data;
  std::uint64_t seed = 0;
};
TrialSetup make_trial(const ExperimentConfig& config, int d, long long n, long long trial);
WeightMatrix make_init(const ExperimentConfig& config, const TeacherSpec& teacher,
                       std::uint64_t trial_seed, InitKind kind);

GDConfig gd_config(const ExperimentConfig& config);

/// Warm start and random init from one shared dataset; columns
/// iter,log10_loss_warm,log10_loss_random.
ResultTable run_fig2a(const ExperimentConfig& config);
/// Columns d,N,ratio,success_count,trials.
ResultTable run_fig2b(const ExperimentConfig& config);
/// Columns d,N,ratio,avg_error.
ResultTable run_fig2c(const ExperimentConfig& config);
/// Columns check,probe_id,seed,N,radius,value.
ResultTable run_check_theory(const ExperimentConfig& config);
/// Trajectory table iter,loss,grad_norm,param_error.
ResultTable run_train(const ExperimentConfig& config);
/// Generates the dataset described by the config.
Dataset run_gen_data(const ExperimentConfig& config);

ResultTable run_experiment(const ExperimentConfig& config);

/// Runs body(i) for i in [0, count) on up to hardware_concurrency threads.
/// Callers write results into slot i, so output order never depends on
/// scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace relu_recover
