#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "relu_recover/objective.hpp"
#include "relu_recover/teacher.hpp"

namespace relu_recover {

/// One measured value. Every probe draws from its own stream derived from
/// (master seed, probe index), recorded in `seed`.
struct ProbeRecord {
  std::string check;
  int probe_id = 0;
  std::uint64_t seed = 0;
  long long n = 0;  // sample size, or MC sample size for population probes
  double radius = 0.0;
  double value = 0.0;
};

struct StrongConvexityResult {
  double mu_hat = 0.0;  // min over probes of lambda_min(empirical Hessian)
  std::vector<ProbeRecord> per_probe;
  Matrix worst_hessian;  // flattened Hessian of the minimizing probe
};

/// Probes W uniformly on the Frobenius sphere of `radius` around W*, each with
/// a fresh N x d Gaussian input matrix, and records lambda_min of the
/// empirical Hessian. Requires radius <= sigma_K / 2 and N >= dK.
/// The direction and the inputs use separate sub-streams, so the same seed at
/// a different radius sees identical inputs.
StrongConvexityResult check_local_strong_convexity(const TeacherSpec& spec, Eigen::Index n,
                                                   int n_probes, double radius, RngStream& rng);

struct LipschitzResult {
  double l_hat = 0.0;
  std::vector<ProbeRecord> per_pair;
};

/// max over random pairs in the radius ball of
/// ||grad L(W1) - grad L(W2)||_F / ||W1 - W2||_F, both population gradients
/// estimated with the same MC draws. Pairs closer than 1e-3 sigma_K are
/// redrawn.
LipschitzResult lipschitz_probe(const TeacherSpec& spec, int n_pairs, double radius,
                                Eigen::Index n_mc, RngStream& rng);

/// Same machinery on empirical Hessians sharing one N x d input matrix per
/// pair; value is ||H(W1) - H(W2)||_2 / ||W1 - W2||_F.
LipschitzResult hessian_lipschitz_probe(const TeacherSpec& spec, int n_pairs, double radius,
                                        Eigen::Index n, RngStream& rng);

struct ConcentrationRow {
  long long n = 0;
  int trials = 0;
  double mean_deviation = 0.0;
  std::string warning;
};

struct ConcentrationResult {
  double slope = 0.0;
  double r_squared = 0.0;
  std::vector<ConcentrationRow> table;
  std::vector<ProbeRecord> per_trial;
};

/// Mean over trials of ||grad L_N(W) - grad L_mc(W)||_F for each N, and the
/// least-squares slope of log(mean) against log(N). Noise level comes from
/// spec.nu. The reference gradient uses n_mc_ref noiseless draws.
ConcentrationResult concentration_sweep(const TeacherSpec& spec, const WeightMatrix& w,
                                        const std::vector<long long>& n_list, int trials,
                                        Eigen::Index n_mc_ref, RngStream& rng);

/// Uniform draw from the Frobenius ball of `radius` around `center`.
WeightMatrix sample_in_ball(const WeightMatrix& center, double radius, RngStream& rng);
/// Uniform draw from the Frobenius sphere of `radius` around `center`.
WeightMatrix sample_on_sphere(const WeightMatrix& center, double radius, RngStream& rng);

struct TheoryReport {
  double mu_hat = 0.0;
  double l_hat = 0.0;
  double concentration_slope = 0.0;
  std::optional<double> rho_hat;
  std::vector<ProbeRecord> rows;
};

/// Columns check,probe_id,seed,N,radius,value.
void write_theory_csv(std::ostream& out, const std::vector<ProbeRecord>& rows);

}  // namespace relu_recover
