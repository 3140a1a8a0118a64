#include "bilevel/harness/experiment.hpp"

#include <exception>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "bilevel/errors.hpp"
#include "bilevel/harness/csv.hpp"
#include "bilevel/morma.hpp"
#include "bilevel/problems/hypercleaning.hpp"
#include "bilevel/problems/libsvm.hpp"
#include "bilevel/problems/logistic.hpp"
#include "bilevel/problems/multitask.hpp"
#include "bilevel/problems/quadratic.hpp"

namespace bilevel {

namespace {

Vector broadcast(const std::vector<double>& v, Index d, const std::string& key) {
  if (v.size() == 1) return Vector::Constant(d, v[0]);
  if (static_cast<Index>(v.size()) != d)
    throw ConfigError("key '" + key + "': length " + std::to_string(v.size()) +
                      " does not match d_x = " + std::to_string(d));
  return Eigen::Map<const Vector>(v.data(), d);
}

std::vector<std::shared_ptr<const BilevelOracle>> build_objectives(const ProblemConfig& p) {
  const auto seed = static_cast<std::uint64_t>(p.seed);
  std::vector<std::shared_ptr<const BilevelOracle>> out;
  if (p.kind == "quadratic") {
    out.push_back(std::make_shared<QuadraticBilevel>(make_quadratic(p.d_x, p.d_y, seed, p.mu_min, p.rho)));
  } else if (p.kind == "trivial") {
    out.push_back(std::make_shared<QuadraticBilevel>(QuadraticBilevel::trivial(p.d_x)));
  } else if (p.kind == "logistic") {
    out.push_back(std::make_shared<LogisticHyperparam>(make_logistic(seed, p.n_train, p.n_val, p.d)));
  } else if (p.kind == "hypercleaning") {
    out.push_back(std::make_shared<HyperCleaning>(
        make_hypercleaning(seed, p.n_train, p.n_val, p.d, p.corruption_p)));
  } else if (p.kind == "libsvm") {
    LabeledData train = read_libsvm_file(p.train_file);
    LabeledData val = read_libsvm_file(p.val_file, train.dim());
    out.push_back(std::make_shared<LogisticHyperparam>(std::move(train), std::move(val)));
  } else if (p.kind == "multitask") {
    const auto problem =
        make_multitask(seed, static_cast<std::size_t>(p.objectives), p.d_x, p.d_y);
    for (std::size_t i = 0; i < problem.size(); ++i) out.push_back(problem.objective_ptr(i));
  } else if (p.kind == "two_task_toy") {
    const auto problem = make_two_task_toy();
    for (std::size_t i = 0; i < problem.size(); ++i) out.push_back(problem.objective_ptr(i));
  } else {
    throw ConfigError("key 'problem.kind': unknown problem '" + p.kind + "'");
  }
  return out;
}

RunOptions run_options(const ExperimentConfig& cfg) {
  RunOptions o;
  o.record_every = cfg.record_every;
  o.ground_truth = cfg.ground_truth;
  return o;
}

std::optional<Vector> start_point(const ExperimentConfig& cfg, Index d) {
  if (cfg.x0.empty()) return std::nullopt;
  return broadcast(cfg.x0, d, "x0");
}

nlohmann::json to_json(const toml::Value& v) {
  switch (v.type) {
    case toml::Value::Type::boolean: return v.boolean;
    case toml::Value::Type::integer: return v.integer;
    case toml::Value::Type::floating: return v.floating;
    case toml::Value::Type::string: return v.string;
    case toml::Value::Type::array: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& item : v.array) arr.push_back(to_json(item));
      return arr;
    }
  }
  return nullptr;
}

std::map<std::string, double> final_metrics(const TraceRecord& r) {
  std::map<std::string, double> m;
  m["k"] = static_cast<double>(r.k);
  m["oracle_calls"] = static_cast<double>(r.oracle_calls);
  auto put = [&](const char* name, const std::optional<double>& v) {
    if (v) m[name] = *v;
  };
  put("phi", r.phi);
  put("grad_map_sq", r.grad_map_sq);
  put("h_err_sq", r.h_err_sq);
  put("y_err_sq", r.y_err_sq);
  put("z_err_sq", r.z_err_sq);
  put("lambda_dist_sq", r.lambda_dist_sq);
  return m;
}

}  // namespace

ProblemInstance build_problem(const ExperimentConfig& cfg) {
  validate(cfg);
  ProblemInstance inst;
  inst.objectives = build_objectives(cfg.problem);
  const Index d = inst.dim_x();
  const auto& c = cfg.constraint;
  if (c.set == "box") {
    inst.set = FeasibleSet::box(broadcast(c.lower, d, "constraint.lower"),
                                broadcast(c.upper, d, "constraint.upper"));
  } else if (c.set == "ball") {
    inst.set = FeasibleSet::ball(broadcast(c.center, d, "constraint.center"), c.radius);
  } else {
    inst.set = FeasibleSet::whole_space(d);
  }
  if (!cfg.x0.empty()) broadcast(cfg.x0, d, "x0");
  return inst;
}

Trajectory run_trajectory(const ExperimentConfig& cfg, const ProblemInstance& problem,
                          std::uint64_t seed) {
  const RunOptions options = run_options(cfg);
  const auto x0 = start_point(cfg, problem.dim_x());
  Trajectory t;
  if (cfg.algorithm == Algorithm::morma_soba) {
    const MultiObjectiveProblem multi(problem.objectives);
    auto result = run_morma(multi, problem.set, cfg.morma_schedule(), cfg.noise, seed, options,
                            initial_morma_state(multi, problem.set, x0));
    t.trace = std::move(result.trace);
    t.R = result.R;
  } else {
    const BilevelOracle& oracle = *problem.objectives.front();
    auto result = run(cfg.algorithm, oracle, problem.set, cfg.step_schedule(), cfg.noise, seed,
                      options, initial_state(oracle, problem.set, x0));
    t.trace = std::move(result.trace);
    t.R = result.R;
  }
  return t;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const ProblemInstance problem = build_problem(cfg);
  std::filesystem::create_directories(cfg.output_dir);

  const auto n = static_cast<std::size_t>(cfg.n_seeds);
  ExperimentResult result;
  result.seeds.resize(n);
  std::vector<std::exception_ptr> errors(n);

#pragma omp parallel for schedule(dynamic)
  for (std::size_t j = 0; j < n; ++j) {
    SeedOutcome& out = result.seeds[j];
    out.seed = static_cast<std::uint64_t>(cfg.seed) + j;
    out.csv_path =
        (std::filesystem::path(cfg.output_dir) / ("trace_seed_" + std::to_string(out.seed) + ".csv"))
            .string();
    try {
      try {
        Trajectory t = run_trajectory(cfg, problem, out.seed);
        out.trace = std::move(t.trace);
        out.x_R_index = t.R;
      } catch (const DivergenceError& e) {
        out.diverged = true;
        out.status = e.what();
      }
      write_csv(out.csv_path, out.trace);
    } catch (...) {
      errors[j] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  nlohmann::json summary;
  nlohmann::json echo = nlohmann::json::object();
  for (const auto& [key, value] : to_table(cfg)) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      echo[key] = to_json(value);
    } else {
      echo[key.substr(0, dot)][key.substr(dot + 1)] = to_json(value);
    }
  }
  summary["config_echo"] = echo;
  summary["per_seed"] = nlohmann::json::array();
  std::map<std::string, std::vector<double>> finals;
  for (const auto& s : result.seeds) {
    nlohmann::json entry;
    entry["seed"] = s.seed;
    entry["status"] = s.status;
    entry["x_R_index"] = s.diverged ? nlohmann::json(nullptr) : nlohmann::json(s.x_R_index);
    entry["final"] = nlohmann::json::object();
    if (!s.diverged && !s.trace.empty()) {
      for (const auto& [name, v] : final_metrics(s.trace.back())) {
        entry["final"][name] = v;
        finals[name].push_back(v);
      }
    }
    result.any_diverged = result.any_diverged || s.diverged;
    summary["per_seed"].push_back(entry);
  }
  summary["medians"] = nlohmann::json::object();
  for (auto& [name, values] : finals) summary["medians"][name] = median(values);

  result.summary_json = summary.dump(2) + "\n";
  result.summary_path = (std::filesystem::path(cfg.output_dir) / "summary.json").string();
  std::ofstream out(result.summary_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + result.summary_path + "'");
  out << result.summary_json;
  return result;
}

RateFit rate_experiment(const ExperimentConfig& cfg, const std::vector<long>& horizons,
                        std::vector<std::pair<double, double>>* means) {
  if (horizons.empty()) throw InvalidArgument("rate_experiment: no horizons");
  std::vector<std::pair<double, double>> points;
  for (long K : horizons) {
    ExperimentConfig c = cfg;
    c.iterations = K;
    c.record_every = 1;
    c.ground_truth = true;
    const ProblemInstance problem = build_problem(c);
    const auto n = static_cast<std::size_t>(c.n_seeds);
    std::vector<double> per_seed(n, 0.0);
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t j = 0; j < n; ++j) {
      try {
        const Trajectory t = run_trajectory(c, problem, static_cast<std::uint64_t>(c.seed) + j);
        double sum = 0.0;
        for (const auto& r : t.trace) {
          if (!r.grad_map_sq) throw UnsupportedOperation("rate: problem has no exact gradient mapping");
          sum += *r.grad_map_sq;
        }
        per_seed[j] = sum / static_cast<double>(t.trace.size());
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
    double mean = 0.0;
    for (double v : per_seed) mean += v;
    points.emplace_back(static_cast<double>(K), mean / static_cast<double>(n));
  }
  if (means) *means = points;
  return fit_rate(points);
}

}  // namespace bilevel
