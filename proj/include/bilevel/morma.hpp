#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bilevel/masoba.hpp"
#include "bilevel/problems/multitask.hpp"

namespace bilevel {

/// Steps for the min-max method. Step sizes follow `base` with n objectives
/// (alpha = alpha0 / sqrt(n K)); the max-player step is tied to the regularizer,
/// tau_lambda = 1 / mu_lambda. Unless set, tau_x = mu_lambda / n, which keeps x slower than
/// the lambda player.
struct MormaSchedule {
  StepSchedule base;
  std::optional<double> tau_x;
  double mu_lambda = 0.01;

  double tau_lambda() const { return 1.0 / mu_lambda; }
  double tau_x_for(std::size_t objectives) const {
    return tau_x ? *tau_x : mu_lambda / static_cast<double>(objectives);
  }

  /// Requires 0 < mu_lambda < 1 on top of base.validate(n). Throws ConfigError.
  void validate(std::size_t objectives) const;
};

struct MormaState {
  Vector x;
  Vector lambda;  ///< on the probability simplex
  std::vector<Vector> y;
  std::vector<Vector> z;
  Vector h_x;
  Vector h_lambda;
  long k = 0;
  long oracle_calls = 0;  ///< estimate draws: 5 per bundle plus n per value vector
  long bundles = 0;       ///< n per iteration
  long value_draws = 0;   ///< one value vector s per iteration
};

/// Zero x0/y/z unless given, lambda0 uniform unless given; h_x = h_lambda = 0.
MormaState initial_morma_state(const MultiObjectiveProblem& problem, const FeasibleSet& set,
                               std::optional<Vector> x0 = std::nullopt,
                               std::optional<Vector> lambda0 = std::nullopt);

/// One iteration, all right-hand sides read from the pre-step state:
///   x+      = x + alpha (P_X(x - tau_x h_x) - x)
///   lambda+ = lambda + alpha (P_simplex(lambda + tau_lambda h_lambda) - lambda)
///   y_i+    = y_i - beta v_i,   z_i+ = z_i - gamma (H_i z_i - u_y,i)        for each i
///   h_x+    = (1 - theta) h_x + theta sum_i lambda_i (u_x,i - J_i z_i)
///   h_l+    = (1 - theta) h_l + theta (s - mu_lambda (lambda - 1/n))
/// `streams[i]` feeds objective i, including its value estimate s_i. Objectives are updated
/// concurrently; the reductions run in index order, so results do not depend on threads.
/// Only mu_lambda > 0 is required here (run_morma enforces mu_lambda < 1).
MormaState morma_step(const MormaState& state, const MultiObjectiveProblem& problem,
                      const FeasibleSet& set, const MormaSchedule& sched, const NoiseSpec& noise,
                      std::vector<OracleStreams>& streams);

struct MormaRunResult {
  std::vector<TraceRecord> trace;
  MormaState final_state;
  Vector x_R;
  long R = 0;
};

/// Streams are OracleStreams::for_objective(seed, i); with n = 1 the draws coincide with
/// run(Algorithm::ma_soba, ...) for the same seed.
MormaRunResult run_morma(const MultiObjectiveProblem& problem, const FeasibleSet& set,
                         const MormaSchedule& sched, const NoiseSpec& noise, std::uint64_t seed,
                         const RunOptions& options = {},
                         std::optional<MormaState> init = std::nullopt);

/// argmax over the simplex of sum_i lambda_i Phi_i(x) - mu/2 |lambda - 1/n|^2,
/// i.e. P_simplex(1/n + Phi(x) / mu). Throws UnsupportedOperation without exact Phi_i.
Vector lambda_star_exact(const MultiObjectiveProblem& problem, const Vector& x, double mu_lambda);

/// Psi(x) = max_lambda Phi_mu(x, lambda).
double psi_value(const MultiObjectiveProblem& problem, const Vector& x, double mu_lambda);

/// grad Psi(x) = sum_i lambda*_i(x) grad Phi_i(x).
Vector psi_grad_exact(const MultiObjectiveProblem& problem, const Vector& x, double mu_lambda);

TraceRecord evaluate_morma_state(const MormaState& state, const MultiObjectiveProblem& problem,
                                 const FeasibleSet& set, const MormaSchedule& sched,
                                 bool ground_truth);

}  // namespace bilevel
