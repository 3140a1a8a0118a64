#include <doctest.h>

#include <cmath>

#include <omp.h>

#include "bilevel/errors.hpp"
#include "bilevel/geometry.hpp"
#include "bilevel/masoba.hpp"
#include "bilevel/morma.hpp"
#include "bilevel/problems/multitask.hpp"
#include "bilevel/problems/quadratic.hpp"
#include "bilevel/validation.hpp"

using namespace bilevel;

namespace {

Vector v2(double a, double b) { return Vector{{a, b}}; }
Vector scalar(double a) { return Vector::Constant(1, a); }

bool near(const Vector& a, const Vector& b, double tol = 1e-12) {
  return (a - b).cwiseAbs().maxCoeff() <= tol;
}

std::vector<OracleStreams> streams_for(std::uint64_t seed, std::size_t n) {
  std::vector<OracleStreams> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(OracleStreams::for_objective(seed, i));
  return out;
}

}  // namespace

TEST_CASE("one-step dual update on the toy") {
  const auto toy = make_two_task_toy();
  const auto set = FeasibleSet::whole_space(1);
  MormaSchedule ms;
  ms.base.alpha0 = 1.0;
  ms.base.horizon = 2;  // alpha = 1 / sqrt(2 * 2) = 0.5
  ms.base.c3 = 2.0;     // theta = 1
  ms.mu_lambda = 1.0;
  auto s = initial_morma_state(toy, set, scalar(0.0), v2(1, 0));
  for (std::size_t i = 0; i < 2; ++i) {
    s.y[i] = toy.objective(i).y_star(s.x);
    s.z[i] = toy.objective(i).z_star(s.x);
  }
  auto streams = streams_for(0, 2);
  const auto next = morma_step(s, toy, set, ms, {}, streams);
  CHECK(near(next.h_lambda, v2(0, 1)));
  CHECK(next.lambda == s.lambda);
  CHECK(next.x == s.x);
  CHECK(next.bundles == 2);
  CHECK(next.value_draws == 1);
  CHECK(next.oracle_calls == 5 * 2 + 2);
}

TEST_CASE("single objective matches the single-objective step") {
  auto q = std::make_shared<QuadraticBilevel>(make_quadratic(3, 4, 7, 0.5));
  const MultiObjectiveProblem single({q});
  const auto set = FeasibleSet::box(Vector::Constant(3, -1.0), Vector::Constant(3, 1.0));
  MormaSchedule ms;
  ms.base.horizon = 400;
  ms.tau_x = ms.base.tau;
  const NoiseSpec noise{0.2, 1, SamplingMode::independent};
  auto ms_streams = streams_for(4, 1);
  auto sa_streams = OracleStreams::for_objective(4, 0);
  auto m = initial_morma_state(single, set);
  auto s = initial_state(*q, set);
  for (int k = 0; k < 30; ++k) {
    const double theta = ms.base.theta(1);
    const double f = q->upper_value(m.x, m.y[0]);
    const double h_lambda_before = m.h_lambda[0];
    m = morma_step(m, single, set, ms, {0.0, 1, SamplingMode::independent}, ms_streams);
    s = ma_soba_step(s, *q, set, ms.base, {0.0, 1, SamplingMode::independent}, sa_streams);
    CHECK(m.lambda == scalar(1.0));
    CHECK(m.h_lambda[0] == doctest::Approx((1 - theta) * h_lambda_before + theta * f));
  }
  CHECK(m.x == s.x);
  CHECK(m.h_x == s.h);
  CHECK(m.y[0] == s.y);
  CHECK(m.z[0] == s.z);

  const auto rm = run_morma(single, set, ms, noise, 9);
  const auto rs = run(Algorithm::ma_soba, *q, set, ms.base, noise, 9);
  CHECK(rm.final_state.x == rs.final_state.x);
  CHECK(rm.x_R == rs.x_R);
  CHECK(near(psi_grad_exact(single, scalar(0.3).replicate(3, 1), 0.01),
             q->hypergrad(scalar(0.3).replicate(3, 1)), 0.0));
}

TEST_CASE("exact max-player response") {
  const auto toy = make_two_task_toy();
  CHECK(near(lambda_star_exact(toy, scalar(0.0), 0.5), v2(0.5, 0.5)));
  CHECK(near(lambda_star_exact(toy, scalar(0.0), 0.01), v2(0.5, 0.5)));
  CHECK(near(lambda_star_exact(toy, scalar(1.0), 1.0), v2(0.0, 1.0)));
  for (double x : {-0.5, 0.0, 0.4}) {
    const Vector l = lambda_star_exact(toy, scalar(x), 1e3);
    CHECK((l - v2(0.5, 0.5)).cwiseAbs().maxCoeff() <= 1e-3);
    const Vector brute = simplex_kkt_bruteforce(Vector::Constant(2, 0.5) + toy.phi_values(scalar(x)) / 0.3);
    CHECK(near(lambda_star_exact(toy, scalar(x), 0.3), brute, 1e-12));
  }
}

TEST_CASE("gradient of the regularized max") {
  const auto toy = make_two_task_toy();
  CHECK(std::abs(psi_grad_exact(toy, scalar(0.0), 1.0)[0]) <= 1e-15);
  const Vector fd = finite_diff_grad([&](const Vector& v) { return psi_value(toy, v, 1.0); }, scalar(0.5));
  const Vector g = psi_grad_exact(toy, scalar(0.5), 1.0);
  CHECK(std::abs(g[0] - fd[0]) <= 1e-5 * std::max(1.0, std::abs(fd[0])));

  const auto multi = make_multitask(3, 3, 2, 3);
  for (double mu : {0.05, 0.5}) {
    const Vector x = v2(0.4, -0.8);
    const Vector fdm = finite_diff_grad([&](const Vector& v) { return psi_value(multi, v, mu); }, x);
    CHECK((psi_grad_exact(multi, x, mu) - fdm).norm() <= 1e-6 * std::max(1.0, fdm.norm()));
  }
}

TEST_CASE("schedule checks") {
  const auto toy = make_two_task_toy();
  MormaSchedule ms;
  ms.base.horizon = 10;
  CHECK(ms.tau_lambda() == doctest::Approx(100.0));
  CHECK(ms.tau_x_for(2) == doctest::Approx(0.005));
  ms.mu_lambda = 1.5;
  CHECK_THROWS_AS(run_morma(toy, FeasibleSet::whole_space(1), ms, {}, 0), ConfigError);
  ms.mu_lambda = 0.0;
  CHECK_THROWS_AS(run_morma(toy, FeasibleSet::whole_space(1), ms, {}, 0), ConfigError);
  ms.mu_lambda = 0.5;
  ms.tau_x = -1.0;
  CHECK_THROWS_AS(run_morma(toy, FeasibleSet::whole_space(1), ms, {}, 0), ConfigError);
}

TEST_CASE("one iteration costs n bundles plus one value vector") {
  for (std::size_t n : {1u, 2u, 4u}) {
    const auto multi = make_multitask(1, n, 2, 2);
    MormaSchedule ms;
    ms.base.horizon = 1;
    ms.base.c3 = 1.0;
    const auto r = run_morma(multi, FeasibleSet::whole_space(2), ms, {}, 0);
    CHECK(r.final_state.bundles + r.final_state.value_draws == long(n) + 1);
    CHECK(r.final_state.oracle_calls == long(5 * n + n));
  }
}

TEST_CASE("lambda stays on the simplex") {
  const auto multi = make_multitask(5, 3, 2, 3);
  const auto set = FeasibleSet::whole_space(2);
  MormaSchedule ms;
  ms.base.horizon = 500;
  ms.mu_lambda = 0.05;
  const NoiseSpec noise{0.5, 1, SamplingMode::independent};
  auto streams = streams_for(2, 3);
  auto s = initial_morma_state(multi, set);
  while (s.k < ms.base.horizon) {
    s = morma_step(s, multi, set, ms, noise, streams);
    REQUIRE(s.lambda.minCoeff() >= 0.0);
    REQUIRE(std::abs(s.lambda.sum() - 1.0) <= 1e-12);
  }
}

TEST_CASE("lambda coercivity on deterministic runs") {
  const auto toy = make_two_task_toy();
  const auto set = FeasibleSet::whole_space(1);
  for (double mu : {0.1, 0.5}) {
    MormaSchedule ms;
    ms.base.horizon = 400;
    ms.mu_lambda = mu;
    auto streams = streams_for(0, 2);
    auto s = initial_morma_state(toy, set, scalar(1.5), v2(0.9, 0.1));
    while (s.k < ms.base.horizon) {
      s = morma_step(s, toy, set, ms, {}, streams);
      const Vector phi = toy.phi_values(s.x);
      const Vector grad_lambda = phi - mu * (s.lambda - Vector::Constant(2, 0.5));
      const Vector plus = project_simplex(s.lambda + ms.tau_lambda() * s.h_lambda);
      const double lhs = (s.lambda - lambda_star_exact(toy, s.x, mu)).squaredNorm();
      const double rhs = 2.0 / (mu * mu) *
                         ((plus - s.lambda).squaredNorm() / (ms.tau_lambda() * ms.tau_lambda()) +
                          (s.h_lambda - grad_lambda).squaredNorm());
      REQUIRE(lhs <= rhs + 1e-14);
    }
  }
}

TEST_CASE("stronger regularization keeps lambda closer to uniform") {
  const auto toy = make_two_task_toy();
  const auto set = FeasibleSet::whole_space(1);
  double prev = 1e300;
  for (double mu : {0.1, 0.3, 0.9}) {
    MormaSchedule ms;
    ms.base.horizon = 3000;
    ms.mu_lambda = mu;
    const auto r = run_morma(toy, set, ms, {}, 0, {}, initial_morma_state(toy, set, scalar(1.5)));
    const double dist = (r.final_state.lambda - v2(0.5, 0.5)).norm();
    CHECK(dist <= prev);
    prev = dist;
  }
}

TEST_CASE("min-max steps do not depend on the thread count") {
  const auto multi = make_multitask(8, 4, 3, 3);
  const auto set = FeasibleSet::whole_space(3);
  MormaSchedule ms;
  ms.base.horizon = 50;
  const NoiseSpec noise{0.3, 2, SamplingMode::independent};
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto a = run_morma(multi, set, ms, noise, 6);
  omp_set_num_threads(4);
  const auto b = run_morma(multi, set, ms, noise, 6);
  omp_set_num_threads(saved);
  CHECK(a.final_state.x == b.final_state.x);
  CHECK(a.final_state.lambda == b.final_state.lambda);
  CHECK(a.final_state.h_x == b.final_state.h_x);
}

TEST_CASE("trace reports the distance to the exact max-player response") {
  const auto toy = make_two_task_toy();
  MormaSchedule ms;
  ms.base.horizon = 20;
  ms.mu_lambda = 0.5;
  RunOptions opt;
  opt.record_every = 10;
  const auto r = run_morma(toy, FeasibleSet::whole_space(1), ms, {}, 0, opt);
  REQUIRE(r.trace.size() == 2);
  for (const auto& rec : r.trace) {
    CHECK(rec.lambda_dist_sq.has_value());
    CHECK(rec.grad_map_sq.has_value());
    CHECK_FALSE(rec.grad_map_is_proxy);
  }
}
