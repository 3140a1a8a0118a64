#include "bilevel/masoba.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <utility>

#include "bilevel/errors.hpp"

namespace bilevel {

double StepSchedule::alpha(std::size_t objectives) const {
  return alpha0 / std::sqrt(static_cast<double>(objectives) * static_cast<double>(horizon));
}

void StepSchedule::validate(std::size_t objectives) const {
  auto fail = [](const std::string& what) { throw ConfigError("step schedule: " + what); };
  if (horizon < 1) fail("horizon K must be >= 1");
  if (objectives < 1) fail("need at least one objective");
  if (!(alpha0 > 0.0) || !(c1 > 0.0) || !(c2 > 0.0) || !(c3 > 0.0) || !(tau > 0.0))
    fail("alpha0, c1, c2, c3 and tau must all be > 0");
  const double a = alpha(objectives);
  if (a > 1.0) fail("alpha = " + std::to_string(a) + " exceeds 1");
  const double t = theta(objectives);
  if (!(t > 0.0 && t <= 1.0)) fail("theta = c3 * alpha = " + std::to_string(t) + " not in (0, 1]");
}

std::vector<std::string> StepSchedule::warnings(double mu_g, double lipschitz_grad_g,
                                                std::size_t objectives) const {
  std::vector<std::string> out;
  const double b = beta(objectives);
  const double g = gamma(objectives);
  if (mu_g > 0.0 && lipschitz_grad_g > 0.0 && !(b < 2.0 / (mu_g + lipschitz_grad_g))) {
    std::ostringstream msg;
    msg << "beta = " << b << " is not below 2/(mu_g + L_g) = " << 2.0 / (mu_g + lipschitz_grad_g);
    out.push_back(msg.str());
  }
  if (mu_g > 0.0 && g > 1.0 / (4.0 * mu_g)) {
    std::ostringstream msg;
    msg << "gamma = " << g << " exceeds 1/(4 mu_g) = " << 1.0 / (4.0 * mu_g);
    out.push_back(msg.str());
  }
  return out;
}

MaSobaState initial_state(const BilevelOracle& oracle, const FeasibleSet& set,
                          std::optional<Vector> x0, std::optional<Vector> y0,
                          std::optional<Vector> z0) {
  if (set.dim() != oracle.dim_x())
    throw ContractViolation("initial_state: feasible set dimension differs from d_x");
  MaSobaState s;
  s.x = project(set, x0 ? *x0 : Vector::Zero(oracle.dim_x()));
  s.y = y0 ? std::move(*y0) : Vector::Zero(oracle.dim_y());
  s.z = z0 ? std::move(*z0) : Vector::Zero(oracle.dim_y());
  s.h = Vector::Zero(oracle.dim_x());
  require_dim(s.y, oracle.dim_y(), "initial_state y0");
  require_dim(s.z, oracle.dim_y(), "initial_state z0");
  return s;
}

namespace updates {

Vector averaged_projection(const FeasibleSet& set, const Vector& x, const Vector& d, double tau,
                           double alpha) {
  return x + alpha * (project(set, x - tau * d) - x);
}

Vector sgd(const Vector& v, const Vector& g, double step) { return v - step * g; }

Vector moving_average(const Vector& h, const Vector& w, double theta) {
  return (1.0 - theta) * h + theta * w;
}

}  // namespace updates

namespace {

void check_step_pre(const MaSobaState& s, const BilevelOracle& oracle, const FeasibleSet& set,
                    const StepSchedule& sched) {
  require_dim(s.x, oracle.dim_x(), "state x");
  require_dim(s.y, oracle.dim_y(), "state y");
  require_dim(s.z, oracle.dim_y(), "state z");
  require_dim(s.h, oracle.dim_x(), "state h");
  if (set.dim() != oracle.dim_x())
    throw ContractViolation("feasible set dimension differs from d_x");
  if (s.k >= sched.horizon)
    throw ContractViolation("step requested at k = " + std::to_string(s.k) +
                            " beyond horizon K = " + std::to_string(sched.horizon));
}

MaSobaState single_loop_step(bool moving_average, const MaSobaState& s,
                             const BilevelOracle& oracle, const FeasibleSet& set,
                             const StepSchedule& sched, const NoiseSpec& noise,
                             OracleStreams& streams) {
  check_step_pre(s, oracle, set, sched);
  const OracleBundle b = draw_bundle(oracle, s.x, s.y, noise, streams);
  const Vector w = b.u_x - b.jvp(s.z);

  MaSobaState next;
  if (moving_average) {
    next.x = updates::averaged_projection(set, s.x, s.h, sched.tau, sched.alpha());
    next.h = updates::moving_average(s.h, w, sched.theta());
  } else {
    next.x = updates::averaged_projection(set, s.x, w, sched.tau, sched.alpha());
    next.h = s.h;
  }
  next.y = updates::sgd(s.y, b.v, sched.beta());
  next.z = updates::sgd(s.z, b.hvp(s.z) - b.u_y, sched.gamma());
  next.k = s.k + 1;
  next.bundles = s.bundles + 1;
  next.oracle_calls = s.oracle_calls + kEstimatesPerBundle;
  return next;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

void guard(const MaSobaState& s, double bound) {
  for (const Vector* v : {&s.x, &s.y, &s.z, &s.h}) {
    if (!v->allFinite()) throw DivergenceError(s.k, "non-finite iterate");
    if (v->norm() > bound) throw DivergenceError(s.k, "iterate norm exceeds divergence bound");
  }
}

}  // namespace

MaSobaState ma_soba_step(const MaSobaState& state, const BilevelOracle& oracle,
                         const FeasibleSet& set, const StepSchedule& sched,
                         const NoiseSpec& noise, OracleStreams& streams) {
  return single_loop_step(true, state, oracle, set, sched, noise, streams);
}

MaSobaState soba_step(const MaSobaState& state, const BilevelOracle& oracle,
                      const FeasibleSet& set, const StepSchedule& sched, const NoiseSpec& noise,
                      OracleStreams& streams) {
  return single_loop_step(false, state, oracle, set, sched, noise, streams);
}

std::string_view to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::ma_soba:
      return "ma_soba";
    case Algorithm::soba:
      return "soba";
    case Algorithm::morma_soba:
      return "morma_soba";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "ma_soba") return Algorithm::ma_soba;
  if (name == "soba") return Algorithm::soba;
  if (name == "morma_soba") return Algorithm::morma_soba;
  throw ConfigError("unknown algorithm '" + std::string(name) +
                    "' (expected ma_soba, soba or morma_soba)");
}

TraceRecord evaluate_state(Algorithm algo, const MaSobaState& state, const BilevelOracle& oracle,
                           const FeasibleSet& set, const StepSchedule& sched, bool ground_truth) {
  TraceRecord r;
  r.k = state.k;
  r.oracle_calls = state.oracle_calls;
  if (ground_truth && oracle.exact_available()) {
    const ReferencePoint ref = oracle.reference(state.x);
    r.phi = ref.phi;
    r.grad_map_sq = gradient_mapping(set, state.x, ref.hypergrad, sched.tau).value.squaredNorm();
    if (algo != Algorithm::soba) r.h_err_sq = (state.h - ref.hypergrad).squaredNorm();
    r.y_err_sq = (state.y - ref.y_star).squaredNorm();
    r.z_err_sq = (state.z - ref.z_star).squaredNorm();
  } else if (algo != Algorithm::soba) {
    r.grad_map_sq = gradient_mapping(set, state.x, state.h, sched.tau).value.squaredNorm();
    r.grad_map_is_proxy = true;
  }
  return r;
}

RunResult run(Algorithm algo, const BilevelOracle& oracle, const FeasibleSet& set,
              const StepSchedule& sched, const NoiseSpec& noise, std::uint64_t seed,
              const RunOptions& options, std::optional<MaSobaState> init) {
  if (algo == Algorithm::morma_soba)
    throw ConfigError("run: morma_soba needs a multi-objective problem (use run_morma)");
  sched.validate();
  noise.validate();
  if (options.record_every < 1) throw ConfigError("record_every must be >= 1");

  RunResult result;
  MaSobaState state = init ? std::move(*init) : initial_state(oracle, set);
  if (!set.contains(state.x, 1e-9)) throw ContractViolation("run: x0 outside the feasible set");

  OracleStreams streams = OracleStreams::for_objective(seed, 0);
  RngStream selection(seed, stream_id(StreamKind::selection));
  result.R = 1 + static_cast<long>(selection.below(static_cast<std::uint64_t>(sched.horizon)));

  const auto start = std::chrono::steady_clock::now();
  const long first_k = state.k;
  while (state.k < sched.horizon) {
    state = algo == Algorithm::ma_soba
                ? ma_soba_step(state, oracle, set, sched, noise, streams)
                : soba_step(state, oracle, set, sched, noise, streams);
    guard(state, options.divergence_bound);
    if (state.k == result.R) result.x_R = state.x;

    const bool stop = options.stop_when_h_below && algo == Algorithm::ma_soba &&
                      state.h.norm() <= *options.stop_when_h_below;
    if (state.k % options.record_every == 0 || state.k == sched.horizon || stop) {
      TraceRecord rec = evaluate_state(algo, state, oracle, set, sched, options.ground_truth);
      rec.wall_ms = elapsed_ms(start);
      result.trace.push_back(std::move(rec));
    }
    if (stop) {
      result.stopped_early = true;
      break;
    }
  }
  if (result.x_R.size() == 0) {
    // R fell outside the iterations actually run (early stop or resumed state).
    result.R = state.k > first_k ? state.k : result.R;
    result.x_R = state.x;
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace bilevel
