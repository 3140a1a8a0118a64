#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bilevel/geometry.hpp"
#include "bilevel/harness/config.hpp"
#include "bilevel/validation.hpp"

namespace bilevel {

/// The configured objectives (one for single-objective problems) and feasible set.
struct ProblemInstance {
  std::vector<std::shared_ptr<const BilevelOracle>> objectives;
  FeasibleSet set = FeasibleSet::whole_space(1);

  Index dim_x() const { return objectives.front()->dim_x(); }
};

/// Builds the problem and feasible set. Throws ConfigError on inconsistent dimensions
/// (x0, bounds) and InvalidArgument on unreadable data files.
ProblemInstance build_problem(const ExperimentConfig& cfg);

struct Trajectory {
  std::vector<TraceRecord> trace;
  long R = 0;
};

/// One run of the configured algorithm for `seed`, recording every `record_every` iterations.
/// Throws DivergenceError.
Trajectory run_trajectory(const ExperimentConfig& cfg, const ProblemInstance& problem,
                          std::uint64_t seed);

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::string status = "ok";  ///< "ok" or "diverged at iteration N: ..."
  bool diverged = false;
  std::vector<TraceRecord> trace;
  long x_R_index = 0;
  std::string csv_path;
};

struct ExperimentResult {
  std::vector<SeedOutcome> seeds;
  std::string summary_json;
  std::string summary_path;
  bool any_diverged = false;
};

/// Runs seeds cfg.seed, cfg.seed + 1, ... (concurrently), writes trace_seed_<s>.csv per seed
/// and summary.json into cfg.output_dir. A diverging seed gets a header-only CSV and is
/// recorded in the summary; sibling seeds are unaffected.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Horizon sweep: for each K runs cfg.n_seeds seeds with every iterate recorded, averages
/// grad_map_sq over iterations 1..K per seed, then over seeds, and fits log-mean vs log-K.
/// `means` receives (K, mean) pairs. Throws DivergenceError.
RateFit rate_experiment(const ExperimentConfig& cfg, const std::vector<long>& horizons,
                        std::vector<std::pair<double, double>>* means = nullptr);

}  // namespace bilevel
