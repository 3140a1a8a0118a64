#include "bilevel/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bilevel/errors.hpp"

namespace bilevel {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "algorithm",          "iterations",          "record_every",         "n_seeds",
      "seed",               "output_dir",          "ground_truth",         "x0",
      "problem.kind",       "problem.seed",        "problem.d_x",          "problem.d_y",
      "problem.mu_min",     "problem.rho",         "problem.n_train",      "problem.n_val",
      "problem.d",          "problem.corruption_p", "problem.objectives",  "problem.train_file",
      "problem.val_file",   "schedule.alpha0",     "schedule.c1",          "schedule.c2",
      "schedule.c3",        "schedule.tau",        "schedule.tau_x",       "schedule.mu_lambda",
      "noise.sigma",        "noise.batch",         "noise.sampling",       "constraint.set",
      "constraint.lower",   "constraint.upper",    "constraint.center",    "constraint.radius",
  };
  return keys;
}

std::vector<double> as_vector(const toml::Value& v, const std::string& key) {
  if (v.is_number()) return {v.as_double(key)};
  if (v.type != toml::Value::Type::array)
    throw ConfigError("key '" + key + "': expected a number or an array of numbers");
  std::vector<double> out;
  for (const auto& item : v.array) out.push_back(item.as_double(key));
  return out;
}

toml::Value vector_value(const std::vector<double>& v) {
  std::vector<toml::Value> items;
  for (double d : v) items.push_back(toml::Value::of(d));
  return toml::Value::of(std::move(items));
}

std::string_view sampling_name(SamplingMode m) {
  return m == SamplingMode::independent ? "independent" : "shared_minibatch";
}

ExperimentConfig from_table(const toml::Table& table) {
  for (const auto& [key, value] : table)
    if (!known_keys().contains(key)) throw ConfigError("unknown key '" + key + "'");

  ExperimentConfig cfg;
  auto get = [&](const std::string& key) -> const toml::Value* {
    const auto it = table.find(key);
    return it == table.end() ? nullptr : &it->second;
  };
  auto set_int = [&](const std::string& key, std::int64_t& out) {
    if (const auto* v = get(key)) out = v->as_integer(key);
  };
  auto set_double = [&](const std::string& key, double& out) {
    if (const auto* v = get(key)) out = v->as_double(key);
  };
  auto set_string = [&](const std::string& key, std::string& out) {
    if (const auto* v = get(key)) out = v->as_string(key);
  };
  auto set_vector = [&](const std::string& key, std::vector<double>& out) {
    if (const auto* v = get(key)) out = as_vector(*v, key);
  };

  if (const auto* v = get("algorithm")) cfg.algorithm = parse_algorithm(v->as_string("algorithm"));
  set_int("iterations", cfg.iterations);
  set_int("record_every", cfg.record_every);
  set_int("n_seeds", cfg.n_seeds);
  set_int("seed", cfg.seed);
  set_string("output_dir", cfg.output_dir);
  if (const auto* v = get("ground_truth")) cfg.ground_truth = v->as_bool("ground_truth");
  set_vector("x0", cfg.x0);

  auto& p = cfg.problem;
  set_string("problem.kind", p.kind);
  set_int("problem.seed", p.seed);
  set_int("problem.d_x", p.d_x);
  set_int("problem.d_y", p.d_y);
  set_double("problem.mu_min", p.mu_min);
  set_double("problem.rho", p.rho);
  set_int("problem.n_train", p.n_train);
  set_int("problem.n_val", p.n_val);
  set_int("problem.d", p.d);
  set_double("problem.corruption_p", p.corruption_p);
  set_int("problem.objectives", p.objectives);
  set_string("problem.train_file", p.train_file);
  set_string("problem.val_file", p.val_file);

  set_double("schedule.alpha0", cfg.schedule.alpha0);
  set_double("schedule.c1", cfg.schedule.c1);
  set_double("schedule.c2", cfg.schedule.c2);
  set_double("schedule.c3", cfg.schedule.c3);
  set_double("schedule.tau", cfg.schedule.tau);
  if (const auto* v = get("schedule.tau_x")) cfg.tau_x = v->as_double("schedule.tau_x");
  set_double("schedule.mu_lambda", cfg.mu_lambda);

  set_double("noise.sigma", cfg.noise.sigma);
  if (const auto* v = get("noise.batch")) cfg.noise.batch = static_cast<int>(v->as_integer("noise.batch"));
  if (const auto* v = get("noise.sampling")) {
    const std::string& name = v->as_string("noise.sampling");
    if (name == "independent") {
      cfg.noise.mode = SamplingMode::independent;
    } else if (name == "shared_minibatch") {
      cfg.noise.mode = SamplingMode::shared_minibatch;
    } else {
      throw ConfigError("key 'noise.sampling': unknown mode '" + name +
                        "' (expected independent or shared_minibatch)");
    }
  }

  set_string("constraint.set", cfg.constraint.set);
  set_vector("constraint.lower", cfg.constraint.lower);
  set_vector("constraint.upper", cfg.constraint.upper);
  set_vector("constraint.center", cfg.constraint.center);
  set_double("constraint.radius", cfg.constraint.radius);

  cfg.schedule.horizon = cfg.iterations;
  validate(cfg);
  return cfg;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("key '" + key + "': " + what);
}

}  // namespace

std::size_t ExperimentConfig::objective_count() const {
  if (problem.kind == "multitask") return static_cast<std::size_t>(problem.objectives);
  if (problem.kind == "two_task_toy") return 2;
  return 1;
}

StepSchedule ExperimentConfig::step_schedule() const {
  StepSchedule s = schedule;
  s.horizon = iterations;
  return s;
}

MormaSchedule ExperimentConfig::morma_schedule() const {
  MormaSchedule m;
  m.base = step_schedule();
  m.tau_x = tau_x;
  m.mu_lambda = mu_lambda;
  return m;
}

void validate(const ExperimentConfig& cfg) {
  static const std::set<std::string> kinds = {"quadratic",    "trivial", "logistic",
                                              "hypercleaning", "multitask", "two_task_toy",
                                              "libsvm"};
  const auto& p = cfg.problem;
  require(kinds.contains(p.kind), "problem.kind",
          "unknown problem '" + p.kind +
              "' (expected quadratic, trivial, logistic, hypercleaning, multitask, two_task_toy "
              "or libsvm)");
  require(cfg.iterations >= 1, "iterations", "must be >= 1");
  require(cfg.record_every >= 1, "record_every", "must be >= 1");
  require(cfg.n_seeds >= 1, "n_seeds", "must be >= 1");
  require(cfg.seed >= 0, "seed", "must be >= 0");
  require(!cfg.output_dir.empty(), "output_dir", "must not be empty");
  require(p.seed >= 0, "problem.seed", "must be >= 0");
  require(p.d_x >= 1, "problem.d_x", "must be >= 1");
  require(p.d_y >= 1, "problem.d_y", "must be >= 1");
  require(p.mu_min > 0.0, "problem.mu_min", "must be > 0");
  require(p.rho >= 0.0, "problem.rho", "must be >= 0");
  require(p.n_train >= 1, "problem.n_train", "must be >= 1");
  require(p.n_val >= 1, "problem.n_val", "must be >= 1");
  require(p.d >= 1, "problem.d", "must be >= 1");
  require(p.corruption_p >= 0.0 && p.corruption_p <= 1.0, "problem.corruption_p",
          "must lie in [0, 1]");
  require(p.objectives >= 1, "problem.objectives", "must be >= 1");
  if (p.kind == "libsvm") {
    require(!p.train_file.empty(), "problem.train_file", "required for libsvm problems");
    require(!p.val_file.empty(), "problem.val_file", "required for libsvm problems");
  }

  const bool multi = p.kind == "multitask" || p.kind == "two_task_toy";
  if (multi && cfg.algorithm != Algorithm::morma_soba)
    throw ConfigError("key 'algorithm': problem '" + p.kind + "' has several objectives and needs "
                      "morma_soba");

  require(cfg.noise.sigma >= 0.0 && std::isfinite(cfg.noise.sigma), "noise.sigma",
          "must be finite and >= 0");
  require(cfg.noise.batch >= 1, "noise.batch", "must be >= 1");
  require(!cfg.tau_x || *cfg.tau_x > 0.0, "schedule.tau_x", "must be > 0");
  require(cfg.mu_lambda > 0.0 && cfg.mu_lambda < 1.0, "schedule.mu_lambda",
          "value " + toml::format(toml::Value::of(cfg.mu_lambda)) +
              " out of range; the min-max method requires 0 < mu_lambda < 1");
  try {
    cfg.step_schedule().validate(cfg.objective_count());
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }

  const auto& c = cfg.constraint;
  require(c.set == "whole_space" || c.set == "box" || c.set == "ball", "constraint.set",
          "unknown set '" + c.set + "' (expected whole_space, box or ball)");
  require(!c.lower.empty() && !c.upper.empty(), "constraint.lower", "bounds must not be empty");
  if (c.lower.size() == c.upper.size()) {
    for (std::size_t i = 0; i < c.lower.size(); ++i)
      require(c.lower[i] <= c.upper[i], "constraint.lower", "must be <= constraint.upper");
  } else if (c.lower.size() == 1 && c.upper.size() == 1) {
    require(c.lower[0] <= c.upper[0], "constraint.lower", "must be <= constraint.upper");
  }
  require(c.radius > 0.0, "constraint.radius", "must be > 0");
}

toml::Table to_table(const ExperimentConfig& cfg) {
  using toml::Value;
  toml::Table t;
  t["algorithm"] = Value::of(std::string(to_string(cfg.algorithm)));
  t["iterations"] = Value::of(cfg.iterations);
  t["record_every"] = Value::of(cfg.record_every);
  t["n_seeds"] = Value::of(cfg.n_seeds);
  t["seed"] = Value::of(cfg.seed);
  t["output_dir"] = Value::of(cfg.output_dir);
  t["ground_truth"] = Value::of(cfg.ground_truth);
  t["x0"] = vector_value(cfg.x0);

  const auto& p = cfg.problem;
  t["problem.kind"] = Value::of(p.kind);
  t["problem.seed"] = Value::of(p.seed);
  t["problem.d_x"] = Value::of(p.d_x);
  t["problem.d_y"] = Value::of(p.d_y);
  t["problem.mu_min"] = Value::of(p.mu_min);
  t["problem.rho"] = Value::of(p.rho);
  t["problem.n_train"] = Value::of(p.n_train);
  t["problem.n_val"] = Value::of(p.n_val);
  t["problem.d"] = Value::of(p.d);
  t["problem.corruption_p"] = Value::of(p.corruption_p);
  t["problem.objectives"] = Value::of(p.objectives);
  t["problem.train_file"] = Value::of(p.train_file);
  t["problem.val_file"] = Value::of(p.val_file);

  t["schedule.alpha0"] = Value::of(cfg.schedule.alpha0);
  t["schedule.c1"] = Value::of(cfg.schedule.c1);
  t["schedule.c2"] = Value::of(cfg.schedule.c2);
  t["schedule.c3"] = Value::of(cfg.schedule.c3);
  t["schedule.tau"] = Value::of(cfg.schedule.tau);
  if (cfg.tau_x) t["schedule.tau_x"] = Value::of(*cfg.tau_x);
  t["schedule.mu_lambda"] = Value::of(cfg.mu_lambda);

  t["noise.sigma"] = Value::of(cfg.noise.sigma);
  t["noise.batch"] = Value::of(static_cast<std::int64_t>(cfg.noise.batch));
  t["noise.sampling"] = Value::of(std::string(sampling_name(cfg.noise.mode)));

  t["constraint.set"] = Value::of(cfg.constraint.set);
  t["constraint.lower"] = vector_value(cfg.constraint.lower);
  t["constraint.upper"] = vector_value(cfg.constraint.upper);
  t["constraint.center"] = vector_value(cfg.constraint.center);
  t["constraint.radius"] = Value::of(cfg.constraint.radius);
  return t;
}

std::string serialize(const ExperimentConfig& cfg) { return toml::serialize(to_table(cfg)); }

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return to_table(a) == to_table(b);
}

ExperimentConfig parse_config(std::string_view text) { return from_table(toml::parse(text)); }

ExperimentConfig parse_config(std::string_view text,
                              const std::vector<std::pair<std::string, std::string>>& overrides) {
  toml::Table table = toml::parse(text);
  for (const auto& [key, raw] : overrides) {
    if (!known_keys().contains(key)) throw ConfigError("unknown key '" + key + "'");
    toml::Value value;
    try {
      value = toml::parse_value(raw);
    } catch (const ConfigError&) {
      value = toml::Value::of(raw);
    }
    table[key] = std::move(value);
  }
  return from_table(table);
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides);
}

}  // namespace bilevel
