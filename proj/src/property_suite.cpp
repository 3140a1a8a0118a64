#include "bilevel/property_suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "bilevel/geometry.hpp"
#include "bilevel/kernels.hpp"
#include "bilevel/masoba.hpp"
#include "bilevel/morma.hpp"
#include "bilevel/problems/logistic.hpp"
#include "bilevel/problems/quadratic.hpp"
#include "bilevel/rng.hpp"
#include "bilevel/validation.hpp"

namespace bilevel {

namespace {

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

PropertyResult simplex_projection() {
  RngStream rng(11, stream_id(StreamKind::data));
  double worst = 0.0;
  for (Index n = 2; n <= 6; ++n) {
    for (int t = 0; t < 200; ++t) {
      const Vector p = 2.0 * rng.normal_vector(n);
      worst = std::max(worst, (project_simplex(p) - simplex_kkt_bruteforce(p)).cwiseAbs().maxCoeff());
    }
  }
  return {"simplex projection matches support enumeration", worst <= 1e-9,
          "max discrepancy " + sci(worst)};
}

PropertyResult hypergrad_fd() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto q = make_quadratic(3, 4, seed, 0.5);
    RngStream rng(seed, stream_id(StreamKind::data, 1));
    const Vector x = rng.normal_vector(3);
    const Vector fd = finite_diff_grad([&](const Vector& v) { return q.phi(v); }, x);
    worst = std::max(worst, rel_err(q.hypergrad(x), fd));
  }
  const auto lg = make_logistic(3, 60, 40, 4);
  const Vector nu = Vector::Constant(4, -1.0);
  const Vector fd = finite_diff_grad([&](const Vector& v) { return lg.phi(v); }, nu);
  worst = std::max(worst, rel_err(lg.hypergrad(nu), fd));
  return {"hypergradient matches finite differences of the value function", worst <= 1e-5,
          "max relative error " + sci(worst)};
}

PropertyResult linear_system() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto q = make_quadratic(3, 4, seed, 0.5);
    const Vector x = Vector::LinSpaced(3, -1.0, 1.0);
    const ReferencePoint r = q.reference(x);
    worst = std::max(worst, (q.A() * r.z_star - q.upper_grad_y(x, r.y_star)).norm());
  }
  return {"z* solves the inner linear system", worst <= 1e-10, "max residual " + sci(worst)};
}

PropertyResult fd_order() {
  const auto q = make_quadratic(2, 3, 5, 0.5);
  auto fn = [&](const Vector& v) { return std::exp(v[0]) * std::sin(v[1]) + q.phi(v); };
  const Vector x = Vector::Constant(2, 0.3);
  const Vector exact =
      Vector{{std::exp(0.3) * std::sin(0.3), std::exp(0.3) * std::cos(0.3)}} + q.hypergrad(x);
  const double e1 = (finite_diff_grad(fn, x, 1e-2) - exact).norm();
  const double e2 = (finite_diff_grad(fn, x, 5e-3) - exact).norm();
  return {"central differences are second order", e1 / e2 >= 3.0,
          "error ratio on halving the step " + sci(e1 / e2)};
}

PropertyResult kernels_agree() {
  RngStream rng(21, stream_id(StreamKind::data));
  const Index n = 1000, d = 7;
  RowMatrix X = rng.normal_matrix(n, d);
  Vector labels(n);
  for (Index i = 0; i < n; ++i) labels[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
  const Vector weights = rng.normal_vector(n).cwiseAbs();
  const Vector w = rng.normal_vector(d);
  const Vector z = rng.normal_vector(d);
  namespace s = kernels::serial;
  namespace p = kernels::parallel;
  double worst = std::abs(s::logistic_loss(X, labels, weights, w) - p::logistic_loss(X, labels, weights, w));
  worst = std::max(worst, rel_err(p::logistic_grad(X, labels, weights, w), s::logistic_grad(X, labels, weights, w)));
  worst = std::max(worst, rel_err(p::logistic_hvp(X, weights, w, z), s::logistic_hvp(X, weights, w, z)));
  worst = std::max(worst, rel_err(p::residual_dot(X, labels, w, z), s::residual_dot(X, labels, w, z)));
  worst = std::max(worst, (p::logistic_hessian(X, weights, w) - s::logistic_hessian(X, weights, w)).norm());
  return {"parallel kernels match the serial reference", worst <= 1e-12, "max deviation " + sci(worst)};
}

PropertyResult nonexpansive() {
  RngStream rng(31, stream_id(StreamKind::data));
  const std::vector<FeasibleSet> sets = {
      FeasibleSet::box(Vector::Constant(4, -0.5), Vector::Constant(4, 0.7)),
      FeasibleSet::ball(Vector::Constant(4, 0.2), 0.8), FeasibleSet::simplex(4)};
  double worst = -1.0;
  for (const auto& set : sets) {
    for (int t = 0; t < 300; ++t) {
      const Vector a = 2.0 * rng.normal_vector(4);
      const Vector b = 2.0 * rng.normal_vector(4);
      worst = std::max(worst, (project(set, a) - project(set, b)).norm() - (a - b).norm());
    }
  }
  return {"projections are nonexpansive", worst <= 1e-12, "max expansion " + sci(worst)};
}

PropertyResult reproducible() {
  const auto q = make_quadratic(3, 4, 7, 0.5);
  const auto set = FeasibleSet::whole_space(3);
  StepSchedule sched;
  sched.horizon = 200;
  const NoiseSpec noise{0.1, 1, SamplingMode::independent};
  const auto a = run(Algorithm::ma_soba, q, set, sched, noise, 3);
  const auto b = run(Algorithm::ma_soba, q, set, sched, noise, 3);
  const bool same = a.final_state.x == b.final_state.x && a.final_state.h == b.final_state.h &&
                    a.R == b.R;
  return {"runs are reproducible from the seed", same, same ? "identical" : "trajectories differ"};
}

PropertyResult morma_reduces() {
  auto q = std::make_shared<QuadraticBilevel>(make_quadratic(3, 4, 7, 0.5));
  const MultiObjectiveProblem single({q});
  const auto set = FeasibleSet::whole_space(3);
  MormaSchedule ms;
  ms.base.horizon = 100;
  ms.tau_x = ms.base.tau;
  const NoiseSpec noise{0.1, 1, SamplingMode::independent};
  const auto m = run_morma(single, set, ms, noise, 5);
  const auto s = run(Algorithm::ma_soba, *q, set, ms.base, noise, 5);
  const bool same = m.final_state.x == s.final_state.x && m.final_state.h_x == s.final_state.h &&
                    m.final_state.y[0] == s.final_state.y && m.final_state.z[0] == s.final_state.z;
  return {"one-objective min-max run equals the single-objective run", same,
          same ? "bitwise equal" : "trajectories differ"};
}

PropertyResult accounting() {
  const auto q = QuadraticBilevel::trivial(2);
  StepSchedule sched;
  sched.horizon = 37;
  const auto r = run(Algorithm::ma_soba, q, FeasibleSet::whole_space(2), sched, {}, 0);
  auto multi = make_two_task_toy();
  MormaSchedule ms;
  ms.base.horizon = 37;
  const auto m = run_morma(multi, FeasibleSet::whole_space(1), ms, {}, 0);
  const bool ok = r.final_state.oracle_calls == 5 * 37 && m.final_state.oracle_calls == (5 * 2 + 2) * 37;
  return {"oracle-call accounting", ok,
          std::to_string(r.final_state.oracle_calls) + " and " +
              std::to_string(m.final_state.oracle_calls) + " draws after 37 iterations"};
}

PropertyResult eta_nonpositive() {
  RngStream rng(41, stream_id(StreamKind::data));
  const auto set = FeasibleSet::box(Vector::Constant(3, -1.0), Vector::Constant(3, 1.0));
  double worst = -1e300;
  for (int t = 0; t < 300; ++t) {
    const Vector x = project(set, rng.normal_vector(3));
    worst = std::max(worst, eta_value(set, x, 3.0 * rng.normal_vector(3), 0.5));
  }
  return {"eta merit value is never positive", worst <= 1e-15, "max value " + sci(worst)};
}

}  // namespace

std::vector<PropertyResult> run_property_suite() {
  const std::vector<std::function<PropertyResult()>> checks = {
      simplex_projection, hypergrad_fd, linear_system, fd_order,     kernels_agree,
      nonexpansive,       eta_nonpositive, reproducible, morma_reduces, accounting};
  std::vector<PropertyResult> out;
  for (const auto& check : checks) {
    try {
      out.push_back(check());
    } catch (const std::exception& e) {
      out.push_back({"(check raised)", false, e.what()});
    }
  }
  return out;
}

}  // namespace bilevel
