#include "bilevel/morma.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <string>
#include <utility>

#include "bilevel/errors.hpp"

namespace bilevel {

void MormaSchedule::validate(std::size_t objectives) const {
  base.validate(objectives);
  if (tau_x && !(*tau_x > 0.0)) throw ConfigError("morma schedule: tau_x must be > 0");
  if (!(mu_lambda > 0.0 && mu_lambda < 1.0))
    throw ConfigError("morma schedule: mu_lambda = " + std::to_string(mu_lambda) +
                      " must satisfy 0 < mu_lambda < 1");
}

MormaState initial_morma_state(const MultiObjectiveProblem& problem, const FeasibleSet& set,
                               std::optional<Vector> x0, std::optional<Vector> lambda0) {
  const Index n = static_cast<Index>(problem.size());
  if (set.dim() != problem.dim_x())
    throw ContractViolation("initial_morma_state: feasible set dimension differs from d_x");
  MormaState s;
  s.x = project(set, x0 ? *x0 : Vector::Zero(problem.dim_x()));
  s.lambda = lambda0 ? std::move(*lambda0) : Vector::Constant(n, 1.0 / static_cast<double>(n));
  require_dim(s.lambda, n, "initial_morma_state lambda0");
  if (!FeasibleSet::simplex(n).contains(s.lambda, 1e-12))
    throw ContractViolation("initial_morma_state: lambda0 not on the simplex");
  for (std::size_t i = 0; i < problem.size(); ++i) {
    s.y.push_back(Vector::Zero(problem.objective(i).dim_y()));
    s.z.push_back(Vector::Zero(problem.objective(i).dim_y()));
  }
  s.h_x = Vector::Zero(problem.dim_x());
  s.h_lambda = Vector::Zero(n);
  return s;
}

MormaState morma_step(const MormaState& s, const MultiObjectiveProblem& problem,
                      const FeasibleSet& set, const MormaSchedule& sched, const NoiseSpec& noise,
                      std::vector<OracleStreams>& streams) {
  const std::size_t n = problem.size();
  const Index nn = static_cast<Index>(n);
  if (streams.size() != n) throw ContractViolation("morma_step: need one stream set per objective");
  if (s.y.size() != n || s.z.size() != n) throw ContractViolation("morma_step: inner state count");
  require_dim(s.x, problem.dim_x(), "morma state x");
  require_dim(s.h_x, problem.dim_x(), "morma state h_x");
  require_dim(s.lambda, nn, "morma state lambda");
  require_dim(s.h_lambda, nn, "morma state h_lambda");
  if (!(sched.mu_lambda > 0.0)) throw ConfigError("morma schedule: mu_lambda must be > 0");
  if (s.k >= sched.base.horizon) throw ContractViolation("morma_step: k beyond horizon");

  const double alpha = sched.base.alpha(n);
  const double beta = sched.base.beta(n);
  const double gamma = sched.base.gamma(n);
  const double theta = sched.base.theta(n);

  MormaState next;
  next.x = updates::averaged_projection(set, s.x, s.h_x, sched.tau_x_for(n), alpha);
  next.lambda = updates::averaged_projection(FeasibleSet::simplex(nn), s.lambda, -s.h_lambda,
                                             sched.tau_lambda(), alpha);
  next.y.resize(n);
  next.z.resize(n);

  std::vector<Vector> w(n);
  Vector values(nn);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(static) if (n > 1)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      const BilevelOracle& o = problem.objective(i);
      const OracleBundle b = draw_bundle(o, s.x, s.y[i], noise, streams[i]);
      next.y[i] = updates::sgd(s.y[i], b.v, beta);
      next.z[i] = updates::sgd(s.z[i], b.hvp(s.z[i]) - b.u_y, gamma);
      w[i] = b.u_x - b.jvp(s.z[i]);
      values[static_cast<Index>(i)] =
          o.sample_upper_value(s.x, s.y[i], noise, streams[i].upper_value);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  Vector weighted = Vector::Zero(problem.dim_x());
  for (std::size_t i = 0; i < n; ++i) weighted += s.lambda[static_cast<Index>(i)] * w[i];
  next.h_x = updates::moving_average(s.h_x, weighted, theta);
  const Vector uniform = Vector::Constant(nn, 1.0 / static_cast<double>(n));
  next.h_lambda =
      updates::moving_average(s.h_lambda, values - sched.mu_lambda * (s.lambda - uniform), theta);

  if ((next.lambda.array() < -1e-9).any() || std::abs(next.lambda.sum() - 1.0) > 1e-9)
    throw InvariantError("lambda left the simplex at iteration " + std::to_string(s.k + 1));

  next.k = s.k + 1;
  next.bundles = s.bundles + static_cast<long>(n);
  next.value_draws = s.value_draws + 1;
  next.oracle_calls =
      s.oracle_calls + kEstimatesPerBundle * static_cast<long>(n) + static_cast<long>(n);
  return next;
}

Vector lambda_star_exact(const MultiObjectiveProblem& problem, const Vector& x, double mu_lambda) {
  if (!problem.has_ground_truth())
    throw UnsupportedOperation("lambda_star_exact: objectives expose no exact Phi values");
  if (!(mu_lambda > 0.0)) throw InvalidArgument("lambda_star_exact: mu_lambda must be > 0");
  const Index n = static_cast<Index>(problem.size());
  const Vector phi = problem.phi_values(x);
  return project_simplex(Vector::Constant(n, 1.0 / static_cast<double>(n)) + phi / mu_lambda);
}

double psi_value(const MultiObjectiveProblem& problem, const Vector& x, double mu_lambda) {
  const Index n = static_cast<Index>(problem.size());
  const Vector lambda = lambda_star_exact(problem, x, mu_lambda);
  const Vector phi = problem.phi_values(x);
  return lambda.dot(phi) -
         0.5 * mu_lambda *
             (lambda - Vector::Constant(n, 1.0 / static_cast<double>(n))).squaredNorm();
}

Vector psi_grad_exact(const MultiObjectiveProblem& problem, const Vector& x, double mu_lambda) {
  const Vector lambda = lambda_star_exact(problem, x, mu_lambda);
  Vector g = Vector::Zero(problem.dim_x());
  for (std::size_t i = 0; i < problem.size(); ++i)
    g += lambda[static_cast<Index>(i)] * problem.objective(i).hypergrad(x);
  return g;
}

TraceRecord evaluate_morma_state(const MormaState& state, const MultiObjectiveProblem& problem,
                                 const FeasibleSet& set, const MormaSchedule& sched,
                                 bool ground_truth) {
  TraceRecord r;
  r.k = state.k;
  r.oracle_calls = state.oracle_calls;
  if (!(ground_truth && problem.has_ground_truth())) {
    r.grad_map_sq = gradient_mapping(set, state.x, state.h_x, sched.tau_x_for(problem.size())).value.squaredNorm();
    r.grad_map_is_proxy = true;
    return r;
  }
  const std::size_t n = problem.size();
  const Index nn = static_cast<Index>(n);
  Vector phi(nn);
  std::vector<Vector> grads(n);
  double y_err = 0.0;
  double z_err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const ReferencePoint ref = problem.objective(i).reference(state.x);
    phi[static_cast<Index>(i)] = ref.phi;
    grads[i] = ref.hypergrad;
    y_err += (state.y[i] - ref.y_star).squaredNorm();
    z_err += (state.z[i] - ref.z_star).squaredNorm();
  }
  const Vector uniform = Vector::Constant(nn, 1.0 / static_cast<double>(n));
  const Vector lambda_star = project_simplex(uniform + phi / sched.mu_lambda);
  Vector grad_psi = Vector::Zero(problem.dim_x());
  Vector grad_x_phi_mu = Vector::Zero(problem.dim_x());
  for (std::size_t i = 0; i < n; ++i) {
    grad_psi += lambda_star[static_cast<Index>(i)] * grads[i];
    grad_x_phi_mu += state.lambda[static_cast<Index>(i)] * grads[i];
  }
  r.phi = lambda_star.dot(phi) - 0.5 * sched.mu_lambda * (lambda_star - uniform).squaredNorm();
  r.grad_map_sq = gradient_mapping(set, state.x, grad_psi, sched.tau_x_for(n)).value.squaredNorm();
  r.h_err_sq = (state.h_x - grad_x_phi_mu).squaredNorm();
  r.y_err_sq = y_err;
  r.z_err_sq = z_err;
  r.lambda_dist_sq = (state.lambda - lambda_star).squaredNorm();
  return r;
}

MormaRunResult run_morma(const MultiObjectiveProblem& problem, const FeasibleSet& set,
                         const MormaSchedule& sched, const NoiseSpec& noise, std::uint64_t seed,
                         const RunOptions& options, std::optional<MormaState> init) {
  const std::size_t n = problem.size();
  sched.validate(n);
  noise.validate();
  if (options.record_every < 1) throw ConfigError("record_every must be >= 1");

  MormaRunResult result;
  MormaState state = init ? std::move(*init) : initial_morma_state(problem, set);
  std::vector<OracleStreams> streams;
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i) streams.push_back(OracleStreams::for_objective(seed, i));
  RngStream selection(seed, stream_id(StreamKind::selection));
  result.R = 1 + static_cast<long>(selection.below(static_cast<std::uint64_t>(sched.base.horizon)));

  const auto start = std::chrono::steady_clock::now();
  while (state.k < sched.base.horizon) {
    state = morma_step(state, problem, set, sched, noise, streams);
    for (const Vector* v : {&state.x, &state.h_x, &state.h_lambda}) {
      if (!v->allFinite()) throw DivergenceError(state.k, "non-finite iterate");
      if (v->norm() > options.divergence_bound)
        throw DivergenceError(state.k, "iterate norm exceeds divergence bound");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!state.y[i].allFinite() || !state.z[i].allFinite())
        throw DivergenceError(state.k, "non-finite inner iterate");
      if (state.y[i].norm() > options.divergence_bound ||
          state.z[i].norm() > options.divergence_bound)
        throw DivergenceError(state.k, "inner iterate norm exceeds divergence bound");
    }
    if (state.k == result.R) result.x_R = state.x;
    if (state.k % options.record_every == 0 || state.k == sched.base.horizon) {
      TraceRecord rec = evaluate_morma_state(state, problem, set, sched, options.ground_truth);
      rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              start)
                        .count();
      result.trace.push_back(std::move(rec));
    }
  }
  if (result.x_R.size() == 0) result.x_R = state.x;
  result.final_state = std::move(state);
  return result;
}

}  // namespace bilevel
