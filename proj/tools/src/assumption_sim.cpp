#include "diffeval/errors.hpp"
#include "diffeval/harness/commands.hpp"
#include "diffeval/harness/csv.hpp"
#include "diffeval/harness/pool.hpp"
#include "diffeval/rng.hpp"

#include <iostream>
#include <limits>

namespace diffeval::harness {

std::vector<AssumptionCell> assumption_sim(const std::vector<int>& sizes,
                                           const std::vector<double>& sigmas,
                                           const std::vector<double>& xis, std::int64_t trials,
                                           std::uint64_t seed, int jobs) {
  if (trials < 1) throw InvalidArgument("assumption_sim: trials must be >= 1");
  const std::size_t n_cells = sizes.size() * sigmas.size();
  const std::size_t per_cell = static_cast<std::size_t>(trials);
  // Smallest feasible xi per trial; every xi is then a threshold test.
  std::vector<double> thresholds(n_cells * per_cell);
  parallel_for(thresholds.size(), jobs, [&](std::size_t i) {
    const std::size_t cell = i / per_cell;
    RandomMdpSpec spec;
    spec.n_pairs = sizes[cell / sigmas.size()];
    spec.sigma = sigmas[cell % sigmas.size()];
    spec.seed = derive_seed(seed, cell, i % per_cell);
    RandomInstance inst = random_mdp(spec);
    const EvaluationProblem problem = EvaluationProblem::create(
        std::move(inst.mdp), std::move(inst.policy), std::move(inst.d_mu),
        std::move(inst.features));
    try {
      thresholds[i] = assumption_7_threshold(problem);
    } catch (const AssumptionViolation&) {
      thresholds[i] = std::numeric_limits<double>::infinity();
    }
  });

  std::vector<AssumptionCell> out;
  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    for (double xi : xis) {
      AssumptionCell c;
      c.n_pairs = sizes[cell / sigmas.size()];
      c.sigma = sigmas[cell % sigmas.size()];
      c.xi = xi;
      c.trials = trials;
      for (std::size_t t = 0; t < per_cell; ++t) {
        if (thresholds[cell * per_cell + t] <= xi) ++c.psd;
      }
      out.push_back(c);
    }
  }
  return out;
}

void write_assumption_csv(const std::vector<AssumptionCell>& cells,
                          const std::filesystem::path& path) {
  CsvWriter csv(path, {"n_pairs", "sigma", "xi", "trials", "psd", "frequency"});
  for (const auto& c : cells) {
    csv.cell(c.n_pairs).cell(c.sigma).cell(c.xi).cell(c.trials).cell(c.psd).cell(c.frequency());
    csv.end_row();
  }
}

int cmd_assumption_sim(const KeyValueConfig& cfg) {
  std::vector<int> sizes;
  for (double s : cfg.get_doubles("sizes", {5, 10, 50, 100})) sizes.push_back(static_cast<int>(s));
  const auto sigmas = cfg.get_doubles("sigmas", {0.0, 0.001, 0.01, 0.1, 1.0});
  const auto xis = cfg.get_doubles("xi", {0.9, 0.99});
  const std::int64_t trials = cfg.get_int("trials", 10000);
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  const int jobs = static_cast<int>(cfg.get_int("jobs", 1));
  const auto cells = assumption_sim(sizes, sigmas, xis, trials, seed, jobs);

  const std::filesystem::path out =
      std::filesystem::path(cfg.get_string("out", default_output_dir().string())) /
      "assumption_sim.csv";
  write_assumption_csv(cells, out);
  for (double xi : xis) {
    std::cout << "xi = " << format_double(xi) << "\n  |S||A| \\ sigma";
    for (double s : sigmas) std::cout << "  " << format_double(s);
    std::cout << "\n";
    for (int n : sizes) {
      std::cout << "  " << n;
      for (double s : sigmas) {
        for (const auto& c : cells) {
          if (c.n_pairs == n && c.sigma == s && c.xi == xi) std::cout << "  " << c.frequency();
        }
      }
      std::cout << "\n";
    }
  }
  std::cout << "wrote " << out.string() << "\n";
  return kExitOk;
}

}  // namespace diffeval::harness
