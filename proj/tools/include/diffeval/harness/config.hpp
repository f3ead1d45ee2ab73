#pragma once

#include "diffeval/learners.hpp"
#include "diffeval/problem.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace diffeval::harness {

/// Flat `key = value` configuration. Lines starting with `#` and text after a
/// `#` are ignored; list values are comma separated.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<std::string> get_strings(const std::string& key,
                                       std::vector<std::string> fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(const std::string& text);
double parse_double(const std::string& text, const std::string& key);
std::int64_t parse_int(const std::string& text, const std::string& key);

/// Which instance to build and with what parameters.
struct EnvSpec {
  /// boyan | random | counterexample
  std::string kind = "boyan";
  double pi0 = 0.5;
  double mu0 = 0.5;
  int n_pairs = 5;
  double sigma = 0.1;
  std::uint64_t env_seed = 0;
  std::optional<int> num_features;
  std::optional<int> max_features;
  std::optional<double> constant_reward;
  /// Subtract the d_mu-weighted feature mean before use.
  bool center_features = false;
};

/// Resolves a mu0 token: a number, "pi0" or "1-pi0".
double resolve_mu0(const std::string& token, double pi0);

EnvSpec env_from_config(const KeyValueConfig& cfg);
EvaluationProblem build_problem(const EnvSpec& spec);

/// 2^lo, ..., 2^hi.
std::vector<double> power_of_two_grid(int lo, int hi);

struct ExperimentConfig {
  EnvSpec env;
  std::vector<Algorithm> algorithms;
  StepSchedule::Kind schedule = StepSchedule::Kind::constant;
  double power = 0.7;
  std::vector<double> alphas;
  /// Second timescale; beta = alpha when empty.
  std::vector<double> betas;
  std::vector<double> etas;
  std::vector<double> lambdas;
  std::int64_t n_steps = 5000;
  int n_seeds = 30;
  std::int64_t metrics_every = 100;
  std::uint64_t seed = 0;
  /// Projection radius; the oracle-based default when unset.
  std::optional<double> radius;
  int jobs = 1;
  std::filesystem::path out;
  // Boyan settings for sweeps.
  std::vector<double> pi0s;
  std::vector<std::string> mu0s;
};

/// Defaults: Boyan chain, diff-gq1/diff-gq2/gradient-dice, alpha in
/// 2^-10..2^-1 (2^-20..2^-1 with full_grid), eta in {0, 0.01, 0.1},
/// lambda in {0, 0.1, 1, 10}, 5000 steps, 30 seeds.
ExperimentConfig experiment_from_config(const KeyValueConfig& cfg);

/// DIFFEVAL_OUT_DIR if set, else "results".
std::filesystem::path default_output_dir();

}  // namespace diffeval::harness
