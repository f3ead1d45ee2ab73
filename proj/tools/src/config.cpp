#include "diffeval/harness/config.hpp"

#include "diffeval/envs.hpp"
#include "diffeval/errors.hpp"
#include "diffeval/sampling.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace diffeval::harness {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": empty key");
    }
    cfg.set(key, trim(line.substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidArgument("cannot read config file " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    // 2^-k shorthand for stepsize grids.
    if (t.rfind("2^", 0) == 0) return std::ldexp(1.0, static_cast<int>(parse_int(t.substr(2), key)));
    throw InvalidArgument("'" + key + "': not a number: '" + text + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw InvalidArgument("'" + key + "': not an integer: '" + text + "'");
  }
  return v;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(it->second, key);
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_int(it->second, key);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string v = lower(it->second);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw InvalidArgument("'" + key + "': not a boolean: '" + it->second + "'");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key,
                                                std::vector<double> fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(it->second)) out.push_back(parse_double(item, key));
  if (out.empty()) throw InvalidArgument("'" + key + "': empty list");
  return out;
}

std::vector<std::string> KeyValueConfig::get_strings(const std::string& key,
                                                     std::vector<std::string> fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  auto out = split_list(it->second);
  if (out.empty()) throw InvalidArgument("'" + key + "': empty list");
  return out;
}

double resolve_mu0(const std::string& token, double pi0) {
  const std::string t = lower(trim(token));
  if (t == "pi0") return pi0;
  if (t == "1-pi0") return 1.0 - pi0;
  return parse_double(t, "mu0");
}

EnvSpec env_from_config(const KeyValueConfig& cfg) {
  EnvSpec spec;
  spec.kind = lower(cfg.get_string("env", spec.kind));
  if (spec.kind != "boyan" && spec.kind != "random" && spec.kind != "counterexample") {
    throw InvalidArgument("env: expected boyan, random or counterexample, got '" + spec.kind + "'");
  }
  spec.pi0 = cfg.get_double("pi0", spec.pi0);
  spec.mu0 = resolve_mu0(cfg.get_string("mu0", "0.5"), spec.pi0);
  spec.n_pairs = static_cast<int>(cfg.get_int("n_pairs", spec.n_pairs));
  spec.sigma = cfg.get_double("sigma", spec.sigma);
  spec.env_seed = static_cast<std::uint64_t>(cfg.get_int("env_seed", 0));
  if (cfg.has("num_features")) spec.num_features = static_cast<int>(cfg.get_int("num_features", 1));
  if (cfg.has("max_features")) spec.max_features = static_cast<int>(cfg.get_int("max_features", 1));
  if (cfg.has("constant_reward")) spec.constant_reward = cfg.get_double("constant_reward", 0.0);
  spec.center_features = cfg.get_bool("center_features", false);
  return spec;
}

EvaluationProblem build_problem(const EnvSpec& spec) {
  EvaluationProblem problem = [&] {
    if (spec.kind == "boyan") {
      if (spec.pi0 < 0.0 || spec.pi0 > 1.0) {
        throw InvalidArgument("pi0 must lie in [0, 1]");
      }
      BoyanChain chain = build_boyan({spec.pi0, spec.mu0});
      return EvaluationProblem::create(std::move(chain.mdp), std::move(chain.policy),
                                       boyan_d_mu(spec.mu0), boyan_features());
    }
    if (spec.kind == "counterexample") {
      CounterexampleInstance c = counterexample_instance();
      return EvaluationProblem::create(std::move(c.mdp), std::move(c.policy), std::move(c.d_mu),
                                       std::move(c.features));
    }
    RandomMdpSpec rs;
    rs.n_pairs = spec.n_pairs;
    rs.sigma = spec.sigma;
    rs.seed = spec.env_seed;
    rs.num_features = spec.num_features;
    rs.max_features = spec.max_features;
    rs.constant_reward = spec.constant_reward;
    RandomInstance inst = random_mdp(rs);
    return EvaluationProblem::create(std::move(inst.mdp), std::move(inst.policy),
                                     std::move(inst.d_mu), std::move(inst.features));
  }();
  if (spec.center_features) {
    return problem.with_features(mean_center(problem.features, problem.d_mu));
  }
  return problem;
}

std::vector<double> power_of_two_grid(int lo, int hi) {
  std::vector<double> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::ldexp(1.0, e));
  return out;
}

ExperimentConfig experiment_from_config(const KeyValueConfig& cfg) {
  ExperimentConfig ex;
  ex.env = env_from_config(cfg);
  for (const auto& name :
       cfg.get_strings("algorithms", {cfg.get_string("algorithm", "diff-gq1,diff-gq2,gradient-dice")})) {
    for (const auto& item : split_list(name)) ex.algorithms.push_back(parse_algorithm(item));
  }
  const std::string schedule = lower(cfg.get_string("schedule", "constant"));
  if (schedule == "constant") {
    ex.schedule = StepSchedule::Kind::constant;
  } else if (schedule == "polynomial") {
    ex.schedule = StepSchedule::Kind::polynomial;
  } else {
    throw InvalidArgument("schedule: expected constant or polynomial");
  }
  ex.power = cfg.get_double("power", ex.power);
  const bool full = cfg.get_bool("full_grid", false);
  ex.alphas = cfg.get_doubles("alpha", power_of_two_grid(full ? -20 : -10, -1));
  ex.betas = cfg.get_doubles("beta", {});
  ex.etas = cfg.get_doubles("eta", {0.0, 0.01, 0.1});
  ex.lambdas = cfg.get_doubles("lambda", {0.0, 0.1, 1.0, 10.0});
  ex.n_steps = cfg.get_int("n_steps", ex.n_steps);
  ex.n_seeds = static_cast<int>(cfg.get_int("n_seeds", ex.n_seeds));
  ex.metrics_every = cfg.get_int("metrics_every", ex.metrics_every);
  ex.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  if (cfg.has("radius")) ex.radius = cfg.get_double("radius", 100.0);
  ex.jobs = static_cast<int>(cfg.get_int("jobs", 1));
  ex.out = cfg.get_string("out", default_output_dir().string());
  ex.pi0s = cfg.get_doubles("pi0_grid", {0.1, 0.3, 0.5, 0.7, 0.9});
  ex.mu0s = cfg.get_strings("mu0_grid", {"pi0", "0.5", "1-pi0"});

  if (ex.algorithms.empty()) throw InvalidArgument("no algorithms given");
  if (ex.n_seeds < 1) throw InvalidArgument("n_seeds must be >= 1");
  if (ex.n_steps < 0) throw InvalidArgument("n_steps must be >= 0");
  if (ex.metrics_every < 1) throw InvalidArgument("metrics_every must be >= 1");
  if (ex.jobs < 1) throw InvalidArgument("jobs must be >= 1");
  for (double e : ex.etas) {
    if (e < 0.0) throw InvalidArgument("eta must be >= 0");
  }
  for (double l : ex.lambdas) {
    if (l < 0.0) throw InvalidArgument("lambda must be >= 0");
  }
  return ex;
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("DIFFEVAL_OUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return "results";
}

}  // namespace diffeval::harness
