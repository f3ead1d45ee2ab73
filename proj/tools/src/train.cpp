#include "diffeval/errors.hpp"
#include "diffeval/harness/commands.hpp"
#include "diffeval/harness/csv.hpp"
#include "diffeval/harness/pool.hpp"
#include "diffeval/rng.hpp"

#include <cmath>
#include <iostream>
#include <limits>

namespace diffeval::harness {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool uses_eta(Algorithm a) {
  return a != Algorithm::diff_sgq && a != Algorithm::projected_gq1 &&
         a != Algorithm::projected_gq2;
}

bool uses_beta(Algorithm a) { return samples_per_update(a) == 2; }

std::filesystem::path output_dir(const KeyValueConfig& cfg) {
  return cfg.get_string("out", default_output_dir().string());
}

struct CellResult {
  bool failed = false;
  std::string error;
  std::vector<MetricRecord> records;
};

CellResult run_cell(const EvaluationProblem& problem, const SamplingDistribution& sampler,
                    const Targets& targets, const ExperimentConfig& ex, const ConfigKey& key,
                    double radius, std::uint64_t seed) {
  TrainConfig tc;
  tc.algorithm = key.algorithm;
  tc.step_sizes = make_step_sizes(ex, key, radius);
  tc.n_steps = ex.n_steps;
  tc.metrics_every = ex.metrics_every;
  tc.seed = seed;
  CellResult out;
  try {
    out.records = run(problem, sampler, tc, targets).records;
  } catch (const NumericalError& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

std::vector<double> radii_for(const EvaluationProblem& problem, const ExperimentConfig& ex) {
  std::vector<double> radii;
  for (Algorithm a : all_algorithms()) {
    radii.push_back(ex.radius ? *ex.radius : default_radius(problem, a));
  }
  return radii;
}

double radius_of(const std::vector<double>& radii, Algorithm a) {
  return radii[static_cast<std::size_t>(a)];
}

}  // namespace

std::vector<ConfigKey> expand_grid(const ExperimentConfig& ex) {
  std::vector<ConfigKey> out;
  for (Algorithm algo : ex.algorithms) {
    const std::vector<double> etas = uses_eta(algo) ? ex.etas : std::vector<double>{0.0};
    const std::vector<double> lambdas =
        algo == Algorithm::gradient_dice ? ex.lambdas : std::vector<double>{0.0};
    std::vector<std::optional<double>> betas{std::nullopt};
    if (uses_beta(algo) && !ex.betas.empty()) {
      betas.clear();
      for (double b : ex.betas) betas.emplace_back(b);
    }
    for (double alpha : ex.alphas) {
      for (const auto& beta : betas) {
        for (double eta : etas) {
          for (double lambda : lambdas) out.push_back({algo, alpha, beta, eta, lambda});
        }
      }
    }
  }
  return out;
}

std::uint64_t run_seed(std::uint64_t base, std::uint64_t setting, int seed_index) {
  return derive_seed(base, setting, static_cast<std::uint64_t>(seed_index));
}

double default_radius(const EvaluationProblem& problem, Algorithm algorithm) {
  constexpr double kFallback = 100.0;
  if (algorithm == Algorithm::projected_gq1) {
    const TdFixedPoint td = td_fixed_point(assemble(problem));
    return td.kind == FixedPointKind::unique ? 10.0 * (1.0 + td.u.norm()) : kFallback;
  }
  if (algorithm == Algorithm::projected_gq2) {
    const TwoStageFixedPoint ts = td_fixed_point_two_stage(problem, assemble(problem));
    return ts.unique ? 10.0 * (1.0 + ts.w.norm()) : kFallback;
  }
  return kFallback;
}

StepSizes make_step_sizes(const ExperimentConfig& ex, const ConfigKey& key, double radius) {
  StepSizes s;
  const auto schedule = [&](double a) {
    return ex.schedule == StepSchedule::Kind::constant ? StepSchedule::constant(a)
                                                       : StepSchedule::polynomial(a, ex.power);
  };
  s.alpha = schedule(key.alpha);
  if (key.beta) s.beta = schedule(*key.beta);
  s.eta = key.eta;
  s.lambda = key.lambda;
  s.radius_dual = radius;
  s.radius_primal = radius;
  return s;
}

std::vector<TrainOutcome> train_all(const EvaluationProblem& problem, const ExperimentConfig& ex,
                                    std::uint64_t setting) {
  const auto grid = expand_grid(ex);
  const SamplingDistribution sampler = problem.sampler();
  const Targets targets = exact_targets(problem);
  const auto radii = radii_for(problem, ex);
  const std::size_t n_seeds = static_cast<std::size_t>(ex.n_seeds);

  std::vector<TrainOutcome> outcomes(grid.size() * n_seeds);
  parallel_for(outcomes.size(), ex.jobs, [&](std::size_t i) {
    const ConfigKey& key = grid[i / n_seeds];
    const int seed_index = static_cast<int>(i % n_seeds);
    TrainOutcome& o = outcomes[i];
    o.job = {key.algorithm, key.alpha, key.beta, key.eta, key.lambda, seed_index,
             run_seed(ex.seed, setting, seed_index)};
    CellResult r = run_cell(problem, sampler, targets, ex, key, radius_of(radii, key.algorithm),
                            o.job.seed);
    o.failed = r.failed;
    o.error = std::move(r.error);
    o.records = std::move(r.records);
  });
  return outcomes;
}

void write_train_csv(const std::vector<TrainOutcome>& outcomes, const std::filesystem::path& path) {
  CsvWriter csv(path, {"step", "seed", "algo", "alpha", "eta", "lambda", "r_hat", "r_bar_100",
                       "r_err", "value_err"});
  for (const auto& o : outcomes) {
    for (const auto& rec : o.records) {
      csv.cell(rec.step)
          .cell(o.job.seed_index)
          .cell(to_string(o.job.algorithm))
          .cell(o.job.alpha)
          .cell(o.job.eta)
          .cell(o.job.lambda)
          .cell(rec.r_hat)
          .cell(rec.r_bar_100)
          .cell(rec.r_err)
          .cell(rec.value_err);
      csv.end_row();
    }
  }
}

int cmd_train(const KeyValueConfig& cfg) {
  KeyValueConfig c = cfg;
  if (!c.has("algorithm") && !c.has("algorithms")) c.set("algorithm", "diff-gq1");
  if (!c.has("alpha")) c.set("alpha", "0.0625");
  if (!c.has("eta")) c.set("eta", "0.01");
  if (!c.has("lambda")) c.set("lambda", "1");
  if (!c.has("n_seeds")) c.set("n_seeds", "1");
  const ExperimentConfig ex = experiment_from_config(c);
  const EvaluationProblem problem = build_problem(ex.env);
  const auto outcomes = train_all(problem, ex);
  const std::filesystem::path out = output_dir(c) / "train.csv";
  write_train_csv(outcomes, out);
  int failed = 0;
  for (const auto& o : outcomes) {
    if (o.failed) {
      ++failed;
      std::cerr << "run failed: " << o.error << "\n";
    }
  }
  std::cout << "wrote " << out.string() << " (" << outcomes.size() << " runs, " << failed
            << " failed)\n";
  return kExitOk;
}

std::optional<std::size_t> select_best(const std::vector<ConfigSummary>& configs,
                                       Algorithm algorithm) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const ConfigSummary& c = configs[i];
    if (c.key.algorithm != algorithm || !std::isfinite(c.mean_final_error)) continue;
    if (!best || c.mean_final_error < configs[*best].mean_final_error) best = i;
  }
  return best;
}

SweepResult sweep(const ExperimentConfig& ex) {
  struct SettingSpec {
    EnvSpec env;
    std::string label;
    std::string mu0_token;
  };
  std::vector<SettingSpec> specs;
  if (ex.env.kind == "boyan") {
    for (const auto& token : ex.mu0s) {
      for (double pi0 : ex.pi0s) {
        SettingSpec s{ex.env, "", token};
        s.env.pi0 = pi0;
        s.env.mu0 = resolve_mu0(token, pi0);
        s.label = "pi0=" + format_double(pi0) + " mu0=" + token;
        specs.push_back(s);
      }
    }
  } else {
    specs.push_back({ex.env, ex.env.kind, ""});
  }

  const auto grid = expand_grid(ex);
  const std::size_t n_seeds = static_cast<std::size_t>(ex.n_seeds);
  SweepResult result;

  for (std::size_t si = 0; si < specs.size(); ++si) {
    const EvaluationProblem problem = build_problem(specs[si].env);
    const SamplingDistribution sampler = problem.sampler();
    const Targets targets = exact_targets(problem);
    if (!targets.reward_rate) {
      throw AssumptionViolation("A1 unichain", specs[si].label + ": no exact reward rate");
    }
    const auto radii = radii_for(problem, ex);

    std::vector<CellResult> cells(grid.size() * n_seeds);
    parallel_for(cells.size(), ex.jobs, [&](std::size_t i) {
      const ConfigKey& key = grid[i / n_seeds];
      cells[i] = run_cell(problem, sampler, targets, ex, key, radius_of(radii, key.algorithm),
                          run_seed(ex.seed, si, static_cast<int>(i % n_seeds)));
    });

    SweepSetting setting;
    setting.label = specs[si].label;
    setting.pi0 = specs[si].env.pi0;
    setting.mu0 = specs[si].env.mu0;
    setting.mu0_token = specs[si].mu0_token;
    setting.reward_rate = *targets.reward_rate;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      ConfigSummary summary;
      summary.key = grid[g];
      double sum = 0.0;
      double sum_sq = 0.0;
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const CellResult& cell = cells[g * n_seeds + s];
        if (cell.failed) {
          ++summary.n_failed;
          continue;
        }
        ++summary.n_ok;
        const double e = cell.records.back().r_err;
        sum += e;
        sum_sq += e * e;
      }
      if (summary.n_failed > 0 || summary.n_ok == 0) {
        summary.mean_final_error = kInf;
        summary.std_final_error = kInf;
      } else {
        const double m = sum / summary.n_ok;
        summary.mean_final_error = m;
        summary.std_final_error = std::sqrt(std::max(0.0, sum_sq / summary.n_ok - m * m));
      }
      if (summary.n_ok == 0) {
        result.warnings.push_back(setting.label + ": " + to_string(grid[g].algorithm) +
                                  " alpha=" + format_double(grid[g].alpha) +
                                  " eta=" + format_double(grid[g].eta) +
                                  " lambda=" + format_double(grid[g].lambda) +
                                  " failed on every seed; excluded");
      }
      setting.configs.push_back(summary);
    }

    for (Algorithm algo : ex.algorithms) {
      const auto best = select_best(setting.configs, algo);
      if (!best) {
        result.warnings.push_back(setting.label + ": no usable config for " + to_string(algo));
        continue;
      }
      Curve curve;
      const auto& first = cells[*best * n_seeds].records;
      for (const auto& rec : first) curve.steps.push_back(rec.step);
      curve.n_runs = static_cast<int>(n_seeds);
      for (std::size_t r = 0; r < first.size(); ++r) {
        double sum = 0.0;
        double sum_sq = 0.0;
        for (std::size_t s = 0; s < n_seeds; ++s) {
          const double e = cells[*best * n_seeds + s].records[r].r_err;
          sum += e;
          sum_sq += e * e;
        }
        const double m = sum / static_cast<double>(n_seeds);
        curve.mean.push_back(m);
        curve.std.push_back(std::sqrt(std::max(0.0, sum_sq / static_cast<double>(n_seeds) - m * m)));
      }
      setting.winners.push_back({algo, *best, std::move(curve)});
    }
    result.settings.push_back(std::move(setting));
  }
  return result;
}

void write_sweep(const SweepResult& result, const std::filesystem::path& dir) {
  const auto key_cells = [](CsvWriter& csv, const ConfigKey& k) {
    csv.cell(to_string(k.algorithm))
        .cell(k.alpha)
        .cell(k.beta ? *k.beta : k.alpha)
        .cell(k.eta)
        .cell(k.lambda);
  };
  const auto setting_cells = [](CsvWriter& csv, const SweepSetting& s) {
    csv.cell(s.label).cell(s.pi0).cell(s.mu0);
  };
  {
    CsvWriter csv(dir / "sweep_configs.csv",
                  {"setting", "pi0", "mu0", "algo", "alpha", "beta", "eta", "lambda", "n_ok",
                   "n_failed", "mean_final_err", "std_final_err"});
    for (const auto& s : result.settings) {
      for (const auto& c : s.configs) {
        setting_cells(csv, s);
        key_cells(csv, c.key);
        csv.cell(c.n_ok).cell(c.n_failed).cell(c.mean_final_error).cell(c.std_final_error);
        csv.end_row();
      }
    }
  }
  {
    CsvWriter csv(dir / "sweep_best.csv",
                  {"setting", "pi0", "mu0", "r_pi", "algo", "alpha", "beta", "eta", "lambda",
                   "mean_final_err", "std_final_err"});
    for (const auto& s : result.settings) {
      for (const auto& w : s.winners) {
        const ConfigSummary& c = s.configs[w.config];
        setting_cells(csv, s);
        csv.cell(s.reward_rate);
        key_cells(csv, c.key);
        csv.cell(c.mean_final_error).cell(c.std_final_error);
        csv.end_row();
      }
    }
  }
  {
    CsvWriter csv(dir / "sweep_curves.csv",
                  {"setting", "pi0", "mu0", "algo", "alpha", "beta", "eta", "lambda", "step",
                   "mean_err", "std_err", "n_runs"});
    for (const auto& s : result.settings) {
      for (const auto& w : s.winners) {
        const ConfigKey& k = s.configs[w.config].key;
        for (std::size_t i = 0; i < w.curve.steps.size(); ++i) {
          setting_cells(csv, s);
          key_cells(csv, k);
          csv.cell(w.curve.steps[i]).cell(w.curve.mean[i]).cell(w.curve.std[i]).cell(w.curve.n_runs);
          csv.end_row();
        }
      }
    }
  }
}

int cmd_sweep(const KeyValueConfig& cfg) {
  const ExperimentConfig ex = experiment_from_config(cfg);
  const SweepResult result = sweep(ex);
  const std::filesystem::path dir = output_dir(cfg);
  write_sweep(result, dir);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& s : result.settings) {
    std::cout << s.label << "  r_pi=" << format_double(s.reward_rate) << "\n";
    for (const auto& w : s.winners) {
      const ConfigSummary& c = s.configs[w.config];
      std::cout << "  " << to_string(w.algorithm) << "  alpha=" << format_double(c.key.alpha)
                << " eta=" << format_double(c.key.eta) << " lambda=" << format_double(c.key.lambda)
                << "  final error " << format_double(c.mean_final_error) << " +- "
                << format_double(c.std_final_error) << "\n";
    }
  }
  std::cout << "wrote " << (dir / "sweep_best.csv").string() << "\n";
  return kExitOk;
}

}  // namespace diffeval::harness
