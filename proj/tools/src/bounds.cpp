#include "diffeval/harness/commands.hpp"
#include "diffeval/harness/csv.hpp"

#include <iostream>
#include <limits>
#include <string>
#include <vector>

namespace diffeval::harness {

namespace {

constexpr double kAlmostOne = 1.0 - 1e-12;

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

}  // namespace

std::vector<BoundsRow> bounds(const EnvSpec& env, const std::string& xi, int count) {
  std::vector<BoundsRow> rows;
  for (int i = 0; i < count; ++i) {
    EnvSpec spec = env;
    spec.env_seed = env.env_seed + static_cast<std::uint64_t>(i);
    spec.center_features = true;
    const EvaluationProblem problem = build_problem(spec);

    BoundsRow row;
    row.instance = i;
    row.env_seed = spec.env_seed;
    row.n_pairs = problem.n_pairs();
    row.n_features = problem.n_features();
    double value = 0.0;
    if (xi == "auto") {
      const auto found = min_feasible_xi(problem);
      row.xi_feasible = found.has_value();
      value = found ? *found : kAlmostOne;
    } else {
      value = parse_double(xi, "xi");
    }
    row.report = proposition1_bounds(problem, value);
    if (!row.xi_feasible) {
      row.report.xi = std::numeric_limits<double>::quiet_NaN();
      row.report.value_rhs = std::numeric_limits<double>::infinity();
      row.report.reward_rhs = std::numeric_limits<double>::infinity();
      row.report.flags.a7_psd = false;
      std::erase(row.report.warnings, std::string("A7 infeasible at this xi"));
      row.report.warnings.emplace_back("A7 infeasible: F is not PSD for any xi < 1");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_bounds_csv(const std::vector<BoundsRow>& rows, const std::filesystem::path& path) {
  CsvWriter csv(path, {"instance", "env_seed", "n_pairs", "n_features", "xi", "fixed_point",
                       "value_lhs", "value_rhs", "value_holds", "reward_lhs", "reward_rhs",
                       "reward_holds", "approximation_error", "p_norm_d", "mu_deviation",
                       "a1", "a3", "a4", "a6", "a7", "a9", "assumptions_hold", "flags"});
  for (const auto& r : rows) {
    const BoundReport& b = r.report;
    csv.cell(r.instance)
        .cell(r.env_seed)
        .cell(r.n_pairs)
        .cell(r.n_features)
        .cell(b.xi)
        .cell(to_string(b.fixed_point))
        .cell(b.value_lhs)
        .cell(b.value_rhs)
        .cell(b.value_lhs <= b.value_rhs)
        .cell(b.reward_lhs)
        .cell(b.reward_rhs)
        .cell(b.reward_lhs <= b.reward_rhs)
        .cell(b.approximation_error)
        .cell(b.p_norm_d)
        .cell(b.mu_deviation)
        .cell(b.flags.a1_unichain)
        .cell(b.flags.a3_independent)
        .cell(b.flags.a4_nonconstant)
        .cell(b.flags.a6_fixed_point)
        .cell(b.flags.a7_psd)
        .cell(b.flags.a9_centered)
        .cell(b.assumptions_hold())
        .cell(join(b.warnings));
    csv.end_row();
  }
}

int cmd_bounds(const KeyValueConfig& cfg) {
  KeyValueConfig c = cfg;
  if (!c.has("env")) c.set("env", "random");
  const EnvSpec env = env_from_config(c);
  const std::string xi = c.get_string("xi", "auto");
  const int count = static_cast<int>(c.get_int("count", 1));
  const auto rows = bounds(env, xi, count);
  const std::filesystem::path out =
      std::filesystem::path(c.get_string("out", default_output_dir().string())) / "bounds.csv";
  write_bounds_csv(rows, out);
  int holding = 0;
  int violated = 0;
  for (const auto& r : rows) {
    const BoundReport& b = r.report;
    if (!b.assumptions_hold()) {
      std::cout << "instance " << r.instance << ": " << join(b.warnings) << "\n";
      continue;
    }
    ++holding;
    if (b.value_lhs > b.value_rhs || b.reward_lhs > b.reward_rhs) ++violated;
  }
  std::cout << holding << " of " << rows.size() << " instances satisfy the assumptions; "
            << violated << " violate a bound\n"
            << "wrote " << out.string() << "\n";
  return kExitOk;
}

}  // namespace diffeval::harness
