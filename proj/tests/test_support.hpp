#pragma once

#include "diffeval/envs.hpp"
#include "diffeval/oracle.hpp"
#include "diffeval/problem.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <fstream>
#include <iterator>
#include <string>

namespace diffeval::testing {

inline EvaluationProblem random_problem(int n_pairs, int k, double sigma, std::uint64_t seed) {
  RandomMdpSpec spec;
  spec.n_pairs = n_pairs;
  spec.sigma = sigma;
  spec.seed = seed;
  spec.num_features = k;
  RandomInstance inst = random_mdp(spec);
  return EvaluationProblem::create(std::move(inst.mdp), std::move(inst.policy),
                                   std::move(inst.d_mu), std::move(inst.features));
}

inline EvaluationProblem tabular_problem(int n_pairs, double sigma, std::uint64_t seed) {
  RandomMdpSpec spec;
  spec.n_pairs = n_pairs;
  spec.sigma = sigma;
  spec.seed = seed;
  spec.num_features = 1;
  RandomInstance inst = random_mdp(spec);
  return EvaluationProblem::create(std::move(inst.mdp), std::move(inst.policy),
                                   std::move(inst.d_mu),
                                   FeatureMap(Matrix::Identity(n_pairs, n_pairs)));
}

inline double rel_diff(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const char* base = std::getenv("DIFFEVAL_TEST_TMP");
  std::filesystem::path dir =
      std::filesystem::path(base ? base : std::filesystem::temp_directory_path().string()) /
      name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace diffeval::testing
