#include "diffeval/harness/commands.hpp"
#include "diffeval/harness/csv.hpp"

#include <iostream>

namespace diffeval::harness {

namespace {

void put(CsvWriter& csv, const std::string& key, double value) {
  csv.cell(key).cell(format_double(value)).end_row();
}

void put(CsvWriter& csv, const std::string& key, const std::string& value) {
  csv.cell(key).cell(value).end_row();
}

void put_vector(CsvWriter& csv, const std::string& prefix, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) put(csv, prefix + "[" + std::to_string(i) + "]", v(i));
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

}  // namespace

void write_solve_report(const FixedPointReport& report, const std::filesystem::path& path) {
  CsvWriter csv(path, {"key", "value"});
  put(csv, "reward_rate", report.reward_rate);
  put(csv, "td_fixed_point", to_string(report.td.kind));
  put(csv, "condition_a", report.td.condition);
  put(csv, "r_hat_td", report.td.u(0));
  put_vector(csv, "u_td", report.td.u);
  put(csv, "two_stage_unique", yes_no(report.two_stage.unique));
  put(csv, "r_hat_two_stage", report.two_stage.r_hat);
  put_vector(csv, "w_two_stage", report.two_stage.w);
  put(csv, "eta", report.eta);
  if (report.u_eta_star) put_vector(csv, "u_eta_star", *report.u_eta_star);
  if (report.w_eta_star) {
    put_vector(csv, "w_eta_star", *report.w_eta_star);
    put(csv, "r_hat_from_w_eta_star", report.r_hat_from_w);
  }
  put(csv, "mspbe1_at_solution", report.mspbe1_at_solution);
  put(csv, "mspbe2_at_solution", report.mspbe2_at_solution);
  put(csv, "a1_unichain", yes_no(report.flags.a1_unichain));
  put(csv, "a3_independent", yes_no(report.flags.a3_independent));
  put(csv, "a4_nonconstant", yes_no(report.flags.a4_nonconstant));
  put(csv, "a6_fixed_point", yes_no(report.flags.a6_fixed_point));
  put(csv, "a9_centered", yes_no(report.flags.a9_centered));
  if (report.bounds) {
    const BoundReport& b = *report.bounds;
    put(csv, "xi", b.xi);
    put(csv, "a7_psd", yes_no(b.flags.a7_psd));
    put(csv, "value_lhs", b.value_lhs);
    put(csv, "value_rhs", b.value_rhs);
    put(csv, "reward_lhs", b.reward_lhs);
    put(csv, "reward_rhs", b.reward_rhs);
  }
  for (std::size_t i = 0; i < report.warnings.size(); ++i) {
    put(csv, "warning[" + std::to_string(i) + "]", report.warnings[i]);
  }
}

int cmd_solve(const KeyValueConfig& cfg) {
  const EnvSpec env = env_from_config(cfg);
  const EvaluationProblem problem = build_problem(env);
  const double eta = cfg.get_doubles("eta", {0.01}).front();
  std::optional<double> xi;
  const std::string xi_token = cfg.get_string("xi", "");
  if (xi_token == "auto") {
    xi = min_feasible_xi(problem.with_features(mean_center(problem.features, problem.d_mu)));
  } else if (!xi_token.empty()) {
    xi = parse_double(xi_token, "xi");
  }
  const FixedPointReport report = build_report(problem, eta, xi);

  const std::filesystem::path out =
      std::filesystem::path(cfg.get_string("out", default_output_dir().string())) / "solve.csv";
  write_solve_report(report, out);

  std::cout << "reward rate r_pi      " << format_double(report.reward_rate) << "\n"
            << "TD fixed point        " << to_string(report.td.kind) << "\n"
            << "r_hat (u_TD)          " << format_double(report.td.u(0)) << "\n"
            << "r_hat (two-stage)     " << format_double(report.two_stage.r_hat) << "\n"
            << "cond(A)               " << format_double(report.td.condition) << "\n";
  if (report.u_eta_star) {
    std::cout << "r_hat (u*_eta)        " << format_double((*report.u_eta_star)(0)) << "\n";
  }
  if (report.bounds) {
    std::cout << "xi                    " << format_double(report.bounds->xi) << "\n"
              << "value bound           " << format_double(report.bounds->value_lhs) << " <= "
              << format_double(report.bounds->value_rhs) << "\n"
              << "reward bound          " << format_double(report.bounds->reward_lhs) << " <= "
              << format_double(report.bounds->reward_rhs) << "\n";
  }
  for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";
  std::cout << "wrote " << out.string() << "\n";
  return kExitOk;
}

}  // namespace diffeval::harness
