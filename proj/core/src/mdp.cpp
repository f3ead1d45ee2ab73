#include "diffeval/mdp.hpp"

#include "diffeval/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace diffeval {

namespace {

constexpr double kProbabilityTolerance = 1e-12;
constexpr double kStationaryResidual = 1e-10;
constexpr int kPowerIterationSweeps = 1'000'000;

void check_probability_rows(const Matrix& m, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if ((m.row(i).array() < 0.0).any() || !m.row(i).allFinite()) {
      throw InvalidArgument(std::string(what) + ": negative or non-finite entry in row " +
                            std::to_string(i));
    }
    if (std::abs(m.row(i).sum() - 1.0) > kProbabilityTolerance) {
      throw InvalidArgument(std::string(what) + ": row " + std::to_string(i) +
                            " does not sum to 1");
    }
  }
}

// Tarjan's algorithm, iterative. Returns the component id of every node.
std::vector<int> strongly_connected_components(const std::vector<std::vector<int>>& graph,
                                               int& n_components) {
  const int n = static_cast<int>(graph.size());
  std::vector<int> index(n, -1), lowlink(n, 0), component(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  std::vector<std::pair<int, std::size_t>> call;
  int counter = 0;
  n_components = 0;

  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) {
      continue;
    }
    call.emplace_back(root, 0);
    while (!call.empty()) {
      auto& [v, child] = call.back();
      if (child == 0) {
        index[v] = lowlink[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      if (child < graph[v].size()) {
        const int w = graph[v][child++];
        if (index[w] == -1) {
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          lowlink[v] = std::min(lowlink[v], index[w]);
        }
        continue;
      }
      if (lowlink[v] == index[v]) {
        int w = -1;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          component[w] = n_components;
        } while (w != v);
        ++n_components;
      }
      const int finished = v;
      call.pop_back();
      if (!call.empty()) {
        const int parent = call.back().first;
        lowlink[parent] = std::min(lowlink[parent], lowlink[finished]);
      }
    }
  }
  return component;
}

double stationary_residual(const Matrix& p, const Vector& d) {
  return (p.transpose() * d - d).lpNorm<Eigen::Infinity>();
}

}  // namespace

Mdp::Mdp(Matrix reward, Matrix transition)
    : reward_(std::move(reward)), transition_(std::move(transition)) {
  if (reward_.rows() < 1 || reward_.cols() < 1) {
    throw InvalidArgument("Mdp: need at least one state and one action");
  }
  if (!reward_.allFinite()) {
    throw InvalidArgument("Mdp: reward entries must be finite");
  }
  if (transition_.rows() != n_pairs() || transition_.cols() != n_states()) {
    throw InvalidArgument("Mdp: transition must be (|S||A|) x |S|");
  }
  check_probability_rows(transition_, "Mdp transition");
}

Vector Mdp::reward_vector() const {
  Vector r(n_pairs());
  for (int s = 0; s < n_states(); ++s) {
    for (int a = 0; a < n_actions(); ++a) {
      r(pair(s, a)) = reward_(s, a);
    }
  }
  return r;
}

Policy::Policy(Matrix probs) : probs_(std::move(probs)) {
  if (probs_.rows() < 1 || probs_.cols() < 1) {
    throw InvalidArgument("Policy: empty probability table");
  }
  check_probability_rows(probs_, "Policy");
}

Policy Policy::uniform_over_states(int n_states, const Vector& action_probs) {
  return Policy(action_probs.transpose().replicate(n_states, 1));
}

Matrix transition_matrix(const Mdp& mdp, const Policy& pi) {
  if (pi.n_states() != mdp.n_states() || pi.n_actions() != mdp.n_actions()) {
    throw InvalidArgument("transition_matrix: policy shape does not match the MDP");
  }
  const int n_actions = mdp.n_actions();
  Matrix p = Matrix::Zero(mdp.n_pairs(), mdp.n_pairs());
  for (int row = 0; row < mdp.n_pairs(); ++row) {
    for (int s_next = 0; s_next < mdp.n_states(); ++s_next) {
      const double ps = mdp.transition()(row, s_next);
      if (ps == 0.0) {
        continue;
      }
      for (int a_next = 0; a_next < n_actions; ++a_next) {
        p(row, s_next * n_actions + a_next) = ps * pi(a_next, s_next);
      }
    }
  }
  return p;
}

UnichainDiagnostic is_unichain(const Matrix& p) {
  const int n = static_cast<int>(p.rows());
  std::vector<std::vector<int>> graph(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (p(i, j) > 0.0) {
        graph[i].push_back(j);
      }
    }
  }
  int n_components = 0;
  const std::vector<int> component = strongly_connected_components(graph, n_components);

  std::vector<bool> closed(n_components, true);
  for (int i = 0; i < n; ++i) {
    for (int j : graph[i]) {
      if (component[j] != component[i]) {
        closed[component[i]] = false;
      }
    }
  }

  UnichainDiagnostic diag;
  diag.recurrent_classes = static_cast<int>(std::count(closed.begin(), closed.end(), true));
  for (int i = 0; i < n; ++i) {
    if (!closed[component[i]]) {
      ++diag.transient_pairs;
    }
  }
  diag.unichain = diag.recurrent_classes == 1;
  std::ostringstream msg;
  msg << diag.recurrent_classes << " recurrent class(es), " << diag.transient_pairs
      << " transient pair(s)";
  diag.message = msg.str();
  return diag;
}

UnichainDiagnostic is_unichain(const Mdp& mdp, const Policy& pi) {
  return is_unichain(transition_matrix(mdp, pi));
}

Vector stationary_sa_distribution(const Matrix& p) {
  if (p.rows() != p.cols() || p.rows() == 0) {
    throw InvalidArgument("stationary_sa_distribution: need a nonempty square matrix");
  }
  const auto diag = is_unichain(p);
  if (!diag) {
    throw AssumptionViolation("A1 unichain", diag.message);
  }
  const Eigen::Index n = p.rows();

  // Stack (P^T - I) on top of the normalization row and solve in the
  // least-squares sense; the system is consistent with a unique solution.
  Matrix system(n + 1, n);
  system.topRows(n) = p.transpose() - Matrix::Identity(n, n);
  system.row(n).setOnes();
  Vector rhs = Vector::Zero(n + 1);
  rhs(n) = 1.0;
  Vector d = system.colPivHouseholderQr().solve(rhs);
  d = d.cwiseMax(0.0);
  d /= d.sum();
  if (d.allFinite() && stationary_residual(p, d) <= kStationaryResidual) {
    return d;
  }

  // Lazy chain shares the stationary distribution and is aperiodic.
  const Matrix lazy_t = 0.5 * (Matrix::Identity(n, n) + p.transpose());
  d = Vector::Constant(n, 1.0 / static_cast<double>(n));
  for (int sweep = 0; sweep < kPowerIterationSweeps; ++sweep) {
    Vector next = lazy_t * d;
    next /= next.sum();
    const double change = (next - d).lpNorm<Eigen::Infinity>();
    d = std::move(next);
    if (change <= 1e-12 && stationary_residual(p, d) <= kStationaryResidual) {
      return d;
    }
  }
  throw NumericalError("stationary_sa_distribution: power iteration did not converge");
}

double reward_rate_exact(const Mdp& mdp, const Policy& pi) {
  return stationary_sa_distribution(transition_matrix(mdp, pi)).dot(mdp.reward_vector());
}

ExactSolution differential_q_exact(const Mdp& mdp, const Policy& pi) {
  const Matrix p = transition_matrix(mdp, pi);
  ExactSolution sol;
  sol.stationary_sa = stationary_sa_distribution(p);
  const Vector r = mdp.reward_vector();
  sol.reward_rate = sol.stationary_sa.dot(r);

  const Eigen::Index n = p.rows();
  const Matrix system = Matrix::Identity(n, n) - p + Vector::Ones(n) * sol.stationary_sa.transpose();
  const Eigen::PartialPivLU<Matrix> lu(system);
  if (!linalg::is_well_conditioned(system)) {
    throw AssumptionViolation("A1 unichain", "differential Bellman system is singular");
  }
  sol.diff_q = lu.solve(r - sol.reward_rate * Vector::Ones(n));
  return sol;
}

double bellman_residual(const Matrix& p, const Vector& r, double rate, const Vector& q) {
  return (r - rate * Vector::Ones(r.size()) + p * q - q).lpNorm<Eigen::Infinity>();
}

}  // namespace diffeval
