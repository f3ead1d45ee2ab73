#include "CLI11.hpp"
#include "diffeval/errors.hpp"
#include "diffeval/harness/commands.hpp"

#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

using namespace diffeval;
using namespace diffeval::harness;

namespace {

struct KeyOption {
  const char* flag;
  const char* key;
  const char* help;
};

const std::vector<KeyOption> kEnvOptions = {
    {"--env", "env", "boyan | random | counterexample"},
    {"--pi0", "pi0", "Boyan target policy pi(a0 | s)"},
    {"--mu0", "mu0", "Boyan sampling mass on a0: number, pi0 or 1-pi0"},
    {"--n-pairs", "n_pairs", "random instance size |S||A|"},
    {"--sigma", "sigma", "random instance off-policy noise"},
    {"--env-seed", "env_seed", "random instance seed"},
    {"--num-features", "num_features", "fixed feature count K"},
    {"--max-features", "max_features", "upper end of the uniform K draw"},
    {"--constant-reward", "constant_reward", "replace rewards with a constant"},
    {"--center-features", "center_features", "mean-center features (true/false)"},
};

const std::vector<KeyOption> kLearnOptions = {
    {"--algorithm", "algorithm", "comma-separated algorithm names"},
    {"--alpha", "alpha", "stepsize grid"},
    {"--beta", "beta", "second-timescale grid (two-sample variants)"},
    {"--eta", "eta", "ridge grid"},
    {"--lambda", "lambda", "GradientDICE normalization grid"},
    {"--schedule", "schedule", "constant | polynomial"},
    {"--power", "power", "polynomial schedule exponent"},
    {"--n-steps", "n_steps", "raw samples per run"},
    {"--n-seeds", "n_seeds", "runs per configuration"},
    {"--metrics-every", "metrics_every", "checkpoint spacing in raw steps"},
    {"--radius", "radius", "projection radius for the projected variants"},
    {"--pi0-grid", "pi0_grid", "Boyan pi0 values for sweeps"},
    {"--mu0-grid", "mu0_grid", "Boyan mu0 tokens for sweeps"},
};

const std::vector<KeyOption> kCommonOptions = {
    {"--seed", "seed", "global seed"},
    {"--out", "out", "output directory (default $DIFFEVAL_OUT_DIR or ./results)"},
    {"--jobs", "jobs", "worker threads"},
};

struct Subcommand {
  CLI::App* app;
  std::string config_file;
  std::map<std::string, std::string> values;
  bool full_grid = false;
  std::function<int(const KeyValueConfig&)> run;
};

void add_options(Subcommand& sub, const std::vector<KeyOption>& opts) {
  for (const auto& o : opts) {
    sub.app->add_option_function<std::string>(
        o.flag, [&sub, key = std::string(o.key)](const std::string& v) { sub.values[key] = v; },
        o.help);
  }
}

KeyValueConfig resolve(const Subcommand& sub) {
  KeyValueConfig cfg =
      sub.config_file.empty() ? KeyValueConfig{} : KeyValueConfig::load(sub.config_file);
  for (const auto& [k, v] : sub.values) cfg.set(k, v);
  if (sub.full_grid) cfg.set("full_grid", "true");
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Off-policy average-reward policy evaluation with linear features"};
  app.require_subcommand(1);

  std::vector<std::unique_ptr<Subcommand>> subs;
  const auto make = [&](const char* name, const char* help,
                        std::function<int(const KeyValueConfig&)> fn) -> Subcommand& {
    auto sub = std::make_unique<Subcommand>();
    sub->app = app.add_subcommand(name, help);
    sub->run = std::move(fn);
    sub->app->add_option("--config", sub->config_file, "key = value configuration file");
    add_options(*sub, kCommonOptions);
    subs.push_back(std::move(sub));
    return *subs.back();
  };

  Subcommand& solve = make("solve", "closed-form fixed points and diagnostics", cmd_solve);
  add_options(solve, kEnvOptions);
  add_options(solve, {{"--eta", "eta", "ridge weight"}, {"--xi", "xi", "xi value or auto"}});

  Subcommand& train = make("train", "training runs with per-checkpoint metrics", cmd_train);
  add_options(train, kEnvOptions);
  add_options(train, kLearnOptions);

  Subcommand& sweep = make("sweep", "hyperparameter sweep and best-config curves", cmd_sweep);
  add_options(sweep, kEnvOptions);
  add_options(sweep, kLearnOptions);
  sweep.app->add_flag("--full-grid", sweep.full_grid, "stepsizes 2^-20 .. 2^-1");

  Subcommand& counter =
      make("counterexample", "divergence of the expected Diff-SGQ update", cmd_counterexample);
  add_options(counter, {{"--alpha", "alpha", "stepsizes"},
                        {"--eta", "eta", "ridge weights for the GQ1 stability check"},
                        {"--threshold", "threshold", "divergence norm threshold"},
                        {"--max-steps", "max_steps", "iteration cap"}});

  Subcommand& sim = make("assumption-sim", "frequency of the PSD condition on random instances",
                         cmd_assumption_sim);
  add_options(sim, {{"--sizes", "sizes", "instance sizes |S||A|"},
                    {"--sigmas", "sigmas", "noise scales"},
                    {"--xi", "xi", "xi values"},
                    {"--trials", "trials", "instances per cell"}});

  Subcommand& bnd = make("bounds", "fixed-point quality bounds on centered features", cmd_bounds);
  add_options(bnd, kEnvOptions);
  add_options(bnd, {{"--xi", "xi", "xi value or auto"}, {"--count", "count", "instances"}});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFailure;
  }

  for (const auto& sub : subs) {
    if (!sub->app->parsed()) continue;
    try {
      return sub->run(resolve(*sub));
    } catch (const AssumptionViolation& e) {
      std::cerr << "assumption violated: " << e.what() << "\n";
      return kExitAssumption;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitFailure;
    }
  }
  return kExitFailure;
}
