#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bilevel/harness/toml.hpp"
#include "bilevel/masoba.hpp"
#include "bilevel/morma.hpp"
#include "bilevel/oracle.hpp"

namespace bilevel {

/// Problem generator selection. `kind` is one of
///   quadratic      make_quadratic(d_x, d_y, seed, mu_min, rho)
///   trivial        QuadraticBilevel::trivial(d_x)
///   logistic       make_logistic(seed, n_train, n_val, d)
///   hypercleaning  make_hypercleaning(seed, n_train, n_val, d, corruption_p)
///   multitask      make_multitask(seed, objectives, d_x, d_y)
///   two_task_toy   make_two_task_toy()
///   libsvm         logistic hyperparameter problem on train_file / val_file
struct ProblemConfig {
  std::string kind = "quadratic";
  std::int64_t seed = 7;
  std::int64_t d_x = 3;
  std::int64_t d_y = 5;
  double mu_min = 0.5;
  double rho = 0.1;
  std::int64_t n_train = 200;
  std::int64_t n_val = 100;
  std::int64_t d = 10;
  double corruption_p = 0.5;
  std::int64_t objectives = 2;
  std::string train_file;
  std::string val_file;
};

/// Feasible set for x. Bounds and centers of length 1 are broadcast to d_x.
struct ConstraintConfig {
  std::string set = "whole_space";  ///< whole_space | box | ball
  std::vector<double> lower{-1.0};
  std::vector<double> upper{1.0};
  std::vector<double> center{0.0};
  double radius = 1.0;
};

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::ma_soba;
  std::int64_t iterations = 1000;
  std::int64_t record_every = 100;
  std::int64_t n_seeds = 1;
  std::int64_t seed = 0;
  std::string output_dir = "results";
  bool ground_truth = true;
  /// Starting point; empty means zero, a single entry is broadcast.
  std::vector<double> x0;

  ProblemConfig problem;
  /// horizon is ignored here; `iterations` is authoritative.
  StepSchedule schedule;
  /// Unset means mu_lambda / n.
  std::optional<double> tau_x;
  double mu_lambda = 0.01;
  NoiseSpec noise;
  ConstraintConfig constraint;

  /// Number of objectives of the configured problem.
  std::size_t objective_count() const;
  StepSchedule step_schedule() const;
  MormaSchedule morma_schedule() const;
};

/// Parses and validates. Throws ConfigError naming the offending key.
ExperimentConfig parse_config(std::string_view text);

/// As parse_config, with `key value` overrides applied on top of the file (dotted keys,
/// values in TOML syntax; unquoted words are taken as strings).
ExperimentConfig parse_config(std::string_view text,
                              const std::vector<std::pair<std::string, std::string>>& overrides);

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Range and consistency checks; throws ConfigError.
void validate(const ExperimentConfig& cfg);

/// Every key, defaults included.
toml::Table to_table(const ExperimentConfig& cfg);
std::string serialize(const ExperimentConfig& cfg);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace bilevel
