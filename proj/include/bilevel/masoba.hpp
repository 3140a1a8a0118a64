#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bilevel/geometry.hpp"
#include "bilevel/oracle.hpp"

namespace bilevel {

/// Constant step sizes tied to one base step:
///   alpha = alpha0 / sqrt(n K),  beta = c1 alpha,  gamma = c2 alpha,  theta = c3 alpha
/// where K is the horizon and n the number of objectives (1 for single-objective runs).
struct StepSchedule {
  double alpha0 = 1.0;
  long horizon = 1000;
  double c1 = 8.0;
  double c2 = 8.0;
  double c3 = 2.0;
  double tau = 1.0;

  double alpha(std::size_t objectives = 1) const;
  double beta(std::size_t objectives = 1) const { return c1 * alpha(objectives); }
  double gamma(std::size_t objectives = 1) const { return c2 * alpha(objectives); }
  double theta(std::size_t objectives = 1) const { return c3 * alpha(objectives); }

  /// Throws ConfigError unless all constants are positive, alpha <= 1 and theta in (0, 1].
  void validate(std::size_t objectives = 1) const;

  /// Soft conditions from the convergence analysis, reported rather than enforced:
  /// beta < 2 / (mu_g + L_g) and gamma <= 1 / (4 mu_g).
  std::vector<std::string> warnings(double mu_g, double lipschitz_grad_g,
                                    std::size_t objectives = 1) const;
};

/// Iterates of the single-objective method.
struct MaSobaState {
  Vector x;  ///< outer variable
  Vector y;  ///< inner variable
  Vector z;  ///< linear-system variable
  Vector h;  ///< moving-average hypergradient
  long k = 0;
  long oracle_calls = 0;  ///< estimate draws (5 per bundle)
  long bundles = 0;
};

/// x0 (projected onto `set`), y0, z0 default to zero; h always starts at zero.
MaSobaState initial_state(const BilevelOracle& oracle, const FeasibleSet& set,
                          std::optional<Vector> x0 = std::nullopt,
                          std::optional<Vector> y0 = std::nullopt,
                          std::optional<Vector> z0 = std::nullopt);

/// The elementary updates shared by every method in the library, so that equal inputs give
/// bitwise equal outputs across methods.
namespace updates {
/// x + alpha (P(x - tau d) - x)
Vector averaged_projection(const FeasibleSet& set, const Vector& x, const Vector& d, double tau,
                           double alpha);
/// v - step g
Vector sgd(const Vector& v, const Vector& g, double step);
/// (1 - theta) h + theta w
Vector moving_average(const Vector& h, const Vector& w, double theta);
}  // namespace updates

/// One MA-SOBA iteration. A single bundle is drawn at (x^k, y^k) and every right-hand side
/// reads the pre-step state:
///   x+ = x + alpha (P(x - tau h) - x)
///   y+ = y - beta v
///   z+ = z - gamma (H z - u_y)
///   h+ = (1 - theta) h + theta (u_x - J z)
MaSobaState ma_soba_step(const MaSobaState& state, const BilevelOracle& oracle,
                         const FeasibleSet& set, const StepSchedule& sched,
                         const NoiseSpec& noise, OracleStreams& streams);

/// SOBA baseline: as ma_soba_step but x is driven by the fresh estimate w = u_x - J z;
/// h is left untouched.
MaSobaState soba_step(const MaSobaState& state, const BilevelOracle& oracle,
                      const FeasibleSet& set, const StepSchedule& sched, const NoiseSpec& noise,
                      OracleStreams& streams);

enum class Algorithm { ma_soba, soba, morma_soba };

std::string_view to_string(Algorithm algo);
/// Throws ConfigError for unknown names.
Algorithm parse_algorithm(std::string_view name);

/// Diagnostics at one recorded iterate. Ground-truth metrics are absent when the problem
/// exposes no exact solution.
struct TraceRecord {
  long k = 0;
  long oracle_calls = 0;
  double wall_ms = 0.0;
  std::optional<double> phi;
  /// |G(x, grad Phi(x), tau)|^2, or |G(x, h, tau)|^2 when grad_map_is_proxy.
  std::optional<double> grad_map_sq;
  std::optional<double> h_err_sq;
  std::optional<double> y_err_sq;
  std::optional<double> z_err_sq;
  std::optional<double> lambda_dist_sq;
  bool grad_map_is_proxy = false;
};

struct RunOptions {
  /// Record every `record_every` iterations and at k = K (k = 0 is never recorded).
  long record_every = 1;
  /// Evaluate ground-truth metrics when the problem supports it.
  bool ground_truth = true;
  /// Abort once any iterate norm exceeds this bound.
  double divergence_bound = 1e8;
  /// Stop early once |h| falls below this value. Off by default.
  std::optional<double> stop_when_h_below;
};

struct RunResult {
  std::vector<TraceRecord> trace;
  MaSobaState final_state;
  /// Uniformly selected iterate x^R, R in {1, ..., K}.
  Vector x_R;
  long R = 0;
  bool stopped_early = false;
};

/// Runs `sched.horizon` iterations of MA-SOBA or SOBA from `init` (default initial_state).
/// Oracle streams are OracleStreams::for_objective(seed, 0); R is drawn from a separate
/// selection stream. Throws DivergenceError naming the iteration on a non-finite or
/// exploding iterate, ConfigError on an invalid schedule.
RunResult run(Algorithm algo, const BilevelOracle& oracle, const FeasibleSet& set,
              const StepSchedule& sched, const NoiseSpec& noise, std::uint64_t seed,
              const RunOptions& options = {}, std::optional<MaSobaState> init = std::nullopt);

/// Diagnostics of `state` (k and counters copied, wall_ms left at zero).
TraceRecord evaluate_state(Algorithm algo, const MaSobaState& state, const BilevelOracle& oracle,
                           const FeasibleSet& set, const StepSchedule& sched, bool ground_truth);

}  // namespace bilevel
