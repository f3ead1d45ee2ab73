#pragma once

#include "diffeval/envs.hpp"
#include "diffeval/harness/config.hpp"
#include "diffeval/oracle.hpp"
#include "diffeval/training.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace diffeval::harness {

/// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitAssumption = 2;

// solve

void write_solve_report(const FixedPointReport& report, const std::filesystem::path& path);
int cmd_solve(const KeyValueConfig& cfg);

// train

/// One (algorithm, stepsizes, seed) cell.
struct TrainJob {
  Algorithm algorithm = Algorithm::diff_gq1;
  double alpha = 0.0;
  std::optional<double> beta;
  double eta = 0.0;
  double lambda = 0.0;
  int seed_index = 0;
  std::uint64_t seed = 0;

  double beta_or_alpha() const { return beta ? *beta : alpha; }
};

/// Hyperparameter cell without the seed.
struct ConfigKey {
  Algorithm algorithm = Algorithm::diff_gq1;
  double alpha = 0.0;
  std::optional<double> beta;
  double eta = 0.0;
  double lambda = 0.0;
};

/// Algorithm x alpha x (beta for the two-timescale variants) x (eta where the
/// algorithm has a ridge) x (lambda for GradientDICE).
std::vector<ConfigKey> expand_grid(const ExperimentConfig& ex);

/// Stream seed of seed index `seed_index` in setting `setting`.
std::uint64_t run_seed(std::uint64_t base, std::uint64_t setting, int seed_index);

/// 10 (1 + ||oracle solution||) for the projected variants, 100 without an
/// oracle solution; unused by the other algorithms.
double default_radius(const EvaluationProblem& problem, Algorithm algorithm);

StepSizes make_step_sizes(const ExperimentConfig& ex, const ConfigKey& key, double radius);

struct TrainOutcome {
  TrainJob job;
  bool failed = false;
  std::string error;
  std::vector<MetricRecord> records;
};

/// Every grid cell for seeds 0..n_seeds-1 on one problem. Failing runs are
/// kept with `failed` set, the error message and no records.
std::vector<TrainOutcome> train_all(const EvaluationProblem& problem, const ExperimentConfig& ex,
                                    std::uint64_t setting = 0);

void write_train_csv(const std::vector<TrainOutcome>& outcomes, const std::filesystem::path& path);
int cmd_train(const KeyValueConfig& cfg);

// sweep

struct ConfigSummary {
  ConfigKey key;
  int n_ok = 0;
  int n_failed = 0;
  /// Mean and standard deviation over seeds of the final |r_bar_100 - r_pi|;
  /// +inf when any seed failed.
  double mean_final_error = 0.0;
  double std_final_error = 0.0;
};

/// Per-step mean and standard deviation of |r_bar_100 - r_pi| across seeds.
struct Curve {
  std::vector<std::int64_t> steps;
  std::vector<double> mean;
  std::vector<double> std;
  int n_runs = 0;
};

struct SweepSetting {
  std::string label;
  double pi0 = 0.0;
  double mu0 = 0.0;
  std::string mu0_token;
  double reward_rate = 0.0;
  std::vector<ConfigSummary> configs;
  /// Winner per algorithm: (algorithm, index into configs, curve).
  struct Winner {
    Algorithm algorithm;
    std::size_t config;
    Curve curve;
  };
  std::vector<Winner> winners;
};

struct SweepResult {
  std::vector<SweepSetting> settings;
  std::vector<std::string> warnings;
};

/// Index of the lowest finite mean final error; ties go to the earlier
/// config. nullopt if every config failed.
std::optional<std::size_t> select_best(const std::vector<ConfigSummary>& configs,
                                       Algorithm algorithm);

/// For the Boyan chain every (pi0, mu0) pair of the grids is a setting;
/// any other env is a single setting.
SweepResult sweep(const ExperimentConfig& ex);

/// sweep_configs.csv, sweep_best.csv and sweep_curves.csv under `dir`.
void write_sweep(const SweepResult& result, const std::filesystem::path& dir);
int cmd_sweep(const KeyValueConfig& cfg);

// counterexample

struct NormTrajectory {
  double alpha = 0.0;
  std::vector<std::int64_t> steps;
  std::vector<double> norms;
  /// First step with norm above the threshold; -1 if never reached.
  std::int64_t crossing_step = -1;
};

struct CounterexampleReport {
  Matrix a;
  double trace = 0.0;
  double determinant = 0.0;
  /// Roots of l^2 - trace l + det, ascending.
  double eigenvalue_low = 0.0;
  double eigenvalue_high = 0.0;
  std::vector<NormTrajectory> trajectories;
  /// Assembled A of the concrete instance equals the example matrix.
  bool instance_matches = false;
  std::vector<double> etas;
  /// Largest real eigenvalue part of GQ1's expected-update matrix per eta.
  std::vector<double> gq1_max_real;
};

/// Iterates u <- u + alpha (A u + b) from (1, 1) until the norm exceeds
/// `threshold` or `max_steps` is reached.
NormTrajectory expected_update_trajectory(const ExpectedUpdateSystem& sys, double alpha,
                                          double threshold, std::int64_t max_steps);

CounterexampleReport counterexample(const std::vector<double>& alphas,
                                    const std::vector<double>& etas, double threshold,
                                    std::int64_t max_steps);

int cmd_counterexample(const KeyValueConfig& cfg);

// assumption-sim

struct AssumptionCell {
  int n_pairs = 0;
  double sigma = 0.0;
  double xi = 0.0;
  std::int64_t trials = 0;
  std::int64_t psd = 0;
  double frequency() const { return trials ? static_cast<double>(psd) / trials : 0.0; }
};

/// Frequency of F being PSD over random instances, per (size, sigma, xi).
/// All xi values share the same instances.
std::vector<AssumptionCell> assumption_sim(const std::vector<int>& sizes,
                                           const std::vector<double>& sigmas,
                                           const std::vector<double>& xis, std::int64_t trials,
                                           std::uint64_t seed, int jobs);

void write_assumption_csv(const std::vector<AssumptionCell>& cells,
                          const std::filesystem::path& path);
int cmd_assumption_sim(const KeyValueConfig& cfg);

// bounds

struct BoundsRow {
  int instance = 0;
  std::uint64_t env_seed = 0;
  int n_pairs = 0;
  int n_features = 0;
  /// False when xi = "auto" found no feasible value below 1.
  bool xi_feasible = true;
  BoundReport report;
};

/// Proposition bounds on `count` instances (env seeds env_seed, env_seed+1,
/// ...) after mean-centering. `xi` is a number or "auto" for bisection.
std::vector<BoundsRow> bounds(const EnvSpec& env, const std::string& xi, int count);

void write_bounds_csv(const std::vector<BoundsRow>& rows, const std::filesystem::path& path);
int cmd_bounds(const KeyValueConfig& cfg);

}  // namespace diffeval::harness
