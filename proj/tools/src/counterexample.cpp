#include "diffeval/harness/commands.hpp"
#include "diffeval/harness/csv.hpp"

#include <cmath>
#include <iostream>

namespace diffeval::harness {

namespace {

constexpr std::int64_t kDenseSteps = 10000;
constexpr std::int64_t kSparseStride = 10000;

}  // namespace

NormTrajectory expected_update_trajectory(const ExpectedUpdateSystem& sys, double alpha,
                                          double threshold, std::int64_t max_steps) {
  NormTrajectory t;
  t.alpha = alpha;
  Vector u = Vector::Ones(sys.a.cols());
  Vector next(u.size());
  t.steps.push_back(0);
  t.norms.push_back(u.norm());
  for (std::int64_t k = 1; k <= max_steps; ++k) {
    next.noalias() = sys.a * u;
    next += sys.b;
    u += alpha * next;
    const double n = u.norm();
    const bool crossed = n > threshold;
    if (k < kDenseSteps || k % kSparseStride == 0 || crossed || k == max_steps) {
      t.steps.push_back(k);
      t.norms.push_back(n);
    }
    if (crossed) {
      t.crossing_step = k;
      break;
    }
  }
  return t;
}

CounterexampleReport counterexample(const std::vector<double>& alphas,
                                    const std::vector<double>& etas, double threshold,
                                    std::int64_t max_steps) {
  const ExpectedUpdateSystem sys = build_counterexample();
  CounterexampleReport rep;
  rep.a = sys.a;
  rep.trace = sys.a.trace();
  rep.determinant = sys.a(0, 0) * sys.a(1, 1) - sys.a(0, 1) * sys.a(1, 0);
  const double disc = std::sqrt(rep.trace * rep.trace - 4.0 * rep.determinant);
  rep.eigenvalue_low = 0.5 * (rep.trace - disc);
  rep.eigenvalue_high = 0.5 * (rep.trace + disc);
  for (double alpha : alphas) {
    rep.trajectories.push_back(expected_update_trajectory(sys, alpha, threshold, max_steps));
  }

  const CounterexampleInstance inst = counterexample_instance();
  const EvaluationProblem problem =
      EvaluationProblem::create(inst.mdp, inst.policy, inst.d_mu, inst.features);
  const FixedPointMatrices m = assemble(problem);
  rep.instance_matches = (m.a - sys.a).cwiseAbs().maxCoeff() <= 1e-12;
  rep.etas = etas;
  for (double eta : etas) {
    rep.gq1_max_real.push_back(linalg::max_real_eigenvalue(expected_update_gq1(m, eta).g));
  }
  return rep;
}

int cmd_counterexample(const KeyValueConfig& cfg) {
  const auto alphas = cfg.get_doubles("alpha", {0.1, 0.01, 0.001});
  const auto etas = cfg.get_doubles("eta", {0.01, 0.1});
  const double threshold = cfg.get_double("threshold", 1e6);
  const std::int64_t max_steps = cfg.get_int("max_steps", 10000000);
  const CounterexampleReport rep = counterexample(alphas, etas, threshold, max_steps);

  const std::filesystem::path dir = cfg.get_string("out", default_output_dir().string());
  {
    CsvWriter csv(dir / "counterexample_norms.csv", {"alpha", "step", "norm"});
    for (const auto& t : rep.trajectories) {
      for (std::size_t i = 0; i < t.steps.size(); ++i) {
        csv.cell(t.alpha).cell(t.steps[i]).cell(t.norms[i]);
        csv.end_row();
      }
    }
  }
  {
    CsvWriter csv(dir / "counterexample_report.csv", {"key", "value"});
    csv.cell("trace").cell(rep.trace).end_row();
    csv.cell("determinant").cell(rep.determinant).end_row();
    csv.cell("eigenvalue_low").cell(rep.eigenvalue_low).end_row();
    csv.cell("eigenvalue_high").cell(rep.eigenvalue_high).end_row();
    csv.cell("instance_matches").cell(rep.instance_matches).end_row();
    for (const auto& t : rep.trajectories) {
      csv.cell("crossing_step[alpha=" + format_double(t.alpha) + "]").cell(t.crossing_step).end_row();
    }
    for (std::size_t i = 0; i < rep.etas.size(); ++i) {
      csv.cell("gq1_max_real_eigenvalue[eta=" + format_double(rep.etas[i]) + "]")
          .cell(rep.gq1_max_real[i])
          .end_row();
    }
  }

  std::cout << "A = [[-1, 6], [-2, 6]]  trace " << format_double(rep.trace) << "  det "
            << format_double(rep.determinant) << "  eigenvalues " << format_double(rep.eigenvalue_low)
            << ", " << format_double(rep.eigenvalue_high) << "\n";
  for (const auto& t : rep.trajectories) {
    std::cout << "alpha " << format_double(t.alpha) << ": ";
    if (t.crossing_step >= 0) {
      std::cout << "|u| > " << format_double(threshold) << " at step " << t.crossing_step << "\n";
    } else {
      std::cout << "|u| = " << format_double(t.norms.back()) << " after " << t.steps.back()
                << " steps\n";
    }
  }
  std::cout << "concrete 2-state instance reproduces A: " << (rep.instance_matches ? "yes" : "no")
            << "\n";
  for (std::size_t i = 0; i < rep.etas.size(); ++i) {
    std::cout << "GQ1 expected update, eta " << format_double(rep.etas[i])
              << ": max real eigenvalue " << format_double(rep.gq1_max_real[i])
              << (rep.gq1_max_real[i] < 0.0 ? " (Hurwitz)" : " (not Hurwitz)") << "\n";
  }
  std::cout << "wrote " << (dir / "counterexample_norms.csv").string() << "\n";
  return kExitOk;
}

}  // namespace diffeval::harness
