#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "bilevel/errors.hpp"
#include "bilevel/geometry.hpp"
#include "bilevel/masoba.hpp"
#include "bilevel/problems/quadratic.hpp"

using namespace bilevel;

namespace {

Vector v2(double a, double b) { return Vector{{a, b}}; }

bool near(const Vector& a, const Vector& b, double tol = 1e-12) {
  return (a - b).cwiseAbs().maxCoeff() <= tol;
}

// alpha = 0.5 and theta = 1.
StepSchedule full_average() {
  StepSchedule s;
  s.alpha0 = 1.0;
  s.horizon = 4;
  s.c1 = 1.0;
  s.c2 = 1.0;
  s.c3 = 2.0;
  return s;
}

MaSobaState trivial_state(Vector x, Vector y, Vector z, Vector h = Vector::Zero(2)) {
  MaSobaState s;
  s.x = std::move(x);
  s.y = std::move(y);
  s.z = std::move(z);
  s.h = std::move(h);
  return s;
}

}  // namespace

TEST_CASE("schedule constants and validation") {
  StepSchedule s;
  s.alpha0 = 2.0;
  s.horizon = 16;
  CHECK(s.alpha() == 0.5);
  CHECK(s.alpha(4) == 0.25);
  CHECK(s.beta() == s.c1 * 0.5);
  CHECK(s.theta() == s.c3 * 0.5);
  s.c3 = 3.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.c3 = 1.0;
  s.alpha0 = -1.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.alpha0 = 1.0;
  s.tau = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.tau = 1.0;
  s.horizon = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("schedule warnings follow the soft step conditions") {
  StepSchedule s;
  s.horizon = 100;  // alpha = 0.1
  s.c1 = 1.0;
  s.c2 = 1.0;
  CHECK(s.warnings(1.0, 1.0).empty());
  s.c1 = 15.0;  // beta = 1.5 >= 2 / (mu + L) = 1
  CHECK(s.warnings(1.0, 1.0).size() == 1);
  s.c2 = 5.0;  // gamma = 0.5 > 1 / (4 mu) = 0.25
  CHECK(s.warnings(1.0, 1.0).size() == 2);
}

TEST_CASE("algorithm names") {
  CHECK(parse_algorithm("ma_soba") == Algorithm::ma_soba);
  CHECK(parse_algorithm("soba") == Algorithm::soba);
  CHECK(parse_algorithm("morma_soba") == Algorithm::morma_soba);
  CHECK(to_string(Algorithm::soba) == "soba");
  CHECK_THROWS_AS(parse_algorithm("adam"), ConfigError);
}

TEST_CASE("warm start reproduces the hypergradient") {
  const auto q = QuadraticBilevel::trivial(2);
  auto streams = OracleStreams::for_objective(0, 0);
  const auto set = FeasibleSet::whole_space(2);
  const auto s = trivial_state(v2(1, 0), v2(1, 0), v2(1, 0));
  const auto next = ma_soba_step(s, q, set, full_average(), {}, streams);
  CHECK(near(next.h, v2(1, 0)));
  CHECK(near(next.h, q.hypergrad(v2(1, 0))));
  CHECK(next.x == s.x);
  CHECK(next.k == 1);
  CHECK(next.bundles == 1);
  CHECK(next.oracle_calls == 5);

  // h now equals w, so both methods move x identically on the repeat draw.
  const auto ma = ma_soba_step(next, q, set, full_average(), {}, streams);
  const auto so = soba_step(next, q, set, full_average(), {}, streams);
  CHECK(ma.x == so.x);
  CHECK(so.h == next.h);
}

TEST_CASE("zero-target inner step leaves z at zero") {
  const auto q = QuadraticBilevel::trivial(2);
  auto streams = OracleStreams::for_objective(0, 0);
  const auto s = trivial_state(v2(1, 0), v2(0, 0), v2(0, 0));
  const auto next = ma_soba_step(s, q, FeasibleSet::whole_space(2), full_average(), {}, streams);
  CHECK(next.z == v2(0, 0));
  CHECK(next.x == v2(1, 0));
}

TEST_CASE("SOBA takes an exact gradient step") {
  const auto q = QuadraticBilevel::trivial(2);
  auto streams = OracleStreams::for_objective(0, 0);
  StepSchedule s;
  s.alpha0 = 0.1;
  s.horizon = 1;
  s.tau = 1.0;
  const auto next = soba_step(trivial_state(v2(1, 0), v2(1, 0), v2(1, 0)), q,
                              FeasibleSet::whole_space(2), s, {}, streams);
  CHECK(near(next.x, v2(0.9, 0)));
}

TEST_CASE("steps past the horizon are rejected") {
  const auto q = QuadraticBilevel::trivial(2);
  auto streams = OracleStreams::for_objective(0, 0);
  auto s = trivial_state(v2(1, 0), v2(0, 0), v2(0, 0));
  s.k = 4;
  CHECK_THROWS_AS(ma_soba_step(s, q, FeasibleSet::whole_space(2), full_average(), {}, streams),
                  ContractViolation);
}

TEST_CASE("collapse to delayed projected gradient descent") {
  const auto q = make_quadratic(3, 5, 7, 0.5);
  const auto set = FeasibleSet::box(Vector::Constant(3, -0.3), Vector::Constant(3, 0.3));
  StepSchedule sched;
  sched.alpha0 = 4.0;
  sched.horizon = 64;  // alpha = 0.5
  sched.c3 = 2.0;      // theta = 1
  sched.tau = 0.7;
  auto streams = OracleStreams::for_objective(0, 0);
  MaSobaState s = initial_state(q, set, Vector::Constant(3, 0.2));
  // The x update reads the pre-step h, i.e. the hypergradient of the previous iterate.
  Vector x = s.x, g_prev = Vector::Zero(3);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    s.y = q.y_star(s.x);
    s.z = q.z_star(s.x);
    const Vector g = q.hypergrad(x);
    s = ma_soba_step(s, q, set, sched, {}, streams);
    const Vector target = (x - sched.tau * g_prev).cwiseMax(-0.3).cwiseMin(0.3);
    x = x + 0.5 * (target - x);
    g_prev = g;
    worst = std::max(worst, (s.x - x).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-12);
  CHECK(near(s.h, g_prev, 1e-12));
}

TEST_CASE("h stays in the convex hull of past estimates") {
  const auto q = QuadraticBilevel::trivial(1);
  const auto set = FeasibleSet::whole_space(1);
  StepSchedule sched;
  sched.horizon = 200;
  auto streams = OracleStreams::for_objective(0, 0);
  MaSobaState s = initial_state(q, set, Vector::Constant(1, 2.0));
  double lo = 0.0, hi = 0.0;
  for (int k = 0; k < 200; ++k) {
    const auto b = exact_eval(q, s.x, s.y);
    const double w = (b.u_x - b.jvp(s.z))[0];
    lo = std::min(lo, w);
    hi = std::max(hi, w);
    s = ma_soba_step(s, q, set, sched, {}, streams);
    CHECK(s.h[0] >= lo - 1e-15);
    CHECK(s.h[0] <= hi + 1e-15);
  }
}

TEST_CASE("deterministic contraction and accounting") {
  const auto q = QuadraticBilevel::trivial(2);
  StepSchedule sched;
  sched.horizon = 2000;
  RunOptions opt;
  opt.record_every = 500;
  const auto r = run(Algorithm::ma_soba, q, FeasibleSet::whole_space(2), sched, {}, 0, opt,
                     initial_state(q, FeasibleSet::whole_space(2), v2(1, -2)));
  CHECK(q.hypergrad(r.final_state.x).norm() <= 1e-6);
  CHECK(r.trace.size() == 4);
  CHECK(r.trace.back().k == 2000);
  CHECK(r.final_state.oracle_calls == 5 * 2000);

  sched.horizon = 1;
  sched.c3 = 1.0;
  const auto one = run(Algorithm::ma_soba, q, FeasibleSet::whole_space(2), sched, {}, 0);
  CHECK(one.final_state.bundles == 1);
  CHECK(one.final_state.oracle_calls == 5);
  CHECK(one.R == 1);
}

TEST_CASE("trace rows and the selected iterate") {
  const auto q = make_quadratic(3, 5, 7, 0.5);
  const auto set = FeasibleSet::whole_space(3);
  StepSchedule sched;
  sched.horizon = 100;
  const NoiseSpec noise{0.1, 1, SamplingMode::independent};
  RunOptions opt;
  opt.record_every = 30;
  const auto r = run(Algorithm::ma_soba, q, set, sched, noise, 11, opt);
  std::vector<long> ks;
  for (const auto& rec : r.trace) ks.push_back(rec.k);
  CHECK(ks == std::vector<long>{30, 60, 90, 100});
  CHECK(r.R >= 1);
  CHECK(r.R <= 100);

  auto streams = OracleStreams::for_objective(11, 0);
  MaSobaState s = initial_state(q, set);
  std::vector<Vector> xs;
  while (s.k < sched.horizon) {
    s = ma_soba_step(s, q, set, sched, noise, streams);
    xs.push_back(s.x);
  }
  CHECK(xs.back() == r.final_state.x);
  CHECK(xs[std::size_t(r.R - 1)] == r.x_R);
}

TEST_CASE("seeds control the noise") {
  const auto q = make_quadratic(3, 5, 7, 0.5);
  StepSchedule sched;
  sched.horizon = 400;
  const NoiseSpec noise{0.1, 1, SamplingMode::independent};
  for (auto algo : {Algorithm::ma_soba, Algorithm::soba}) {
    const auto a = run(algo, q, FeasibleSet::whole_space(3), sched, noise, 1);
    const auto b = run(algo, q, FeasibleSet::whole_space(3), sched, noise, 1);
    const auto c = run(algo, q, FeasibleSet::whole_space(3), sched, noise, 2);
    CHECK(a.final_state.x == b.final_state.x);
    CHECK(a.final_state.x != c.final_state.x);
  }
}

TEST_CASE("noisy runs stay finite and the running average of the gradient mapping settles") {
  const auto q = make_quadratic(3, 5, 7, 0.5);
  StepSchedule sched;
  sched.horizon = 4000;
  const NoiseSpec noise{0.1, 1, SamplingMode::independent};
  for (std::uint64_t seed : {1, 2}) {
    const auto r = run(Algorithm::ma_soba, q, FeasibleSet::whole_space(3), sched, noise, seed);
    REQUIRE(r.trace.size() == 4000);
    CHECK(r.final_state.x.allFinite());
    double sum = 0.0, half = 0.0;
    for (const auto& rec : r.trace) {
      sum += *rec.grad_map_sq;
      if (rec.k == 2000) half = sum / 2000.0;
    }
    CHECK(sum / 4000.0 <= half);
  }
}

TEST_CASE("iterates stay feasible") {
  const auto q = make_quadratic(3, 5, 7, 0.5);
  const std::vector<FeasibleSet> sets = {
      FeasibleSet::box(Vector::Constant(3, -0.2), Vector::Constant(3, 0.1)),
      FeasibleSet::ball(Vector::Constant(3, 0.5), 0.3)};
  StepSchedule sched;
  sched.horizon = 300;
  const NoiseSpec noise{0.5, 1, SamplingMode::independent};
  for (const auto& set : sets) {
    auto streams = OracleStreams::for_objective(3, 0);
    MaSobaState s = initial_state(q, set);
    CHECK(set.contains(s.x, 0.0));
    while (s.k < sched.horizon) {
      s = ma_soba_step(s, q, set, sched, noise, streams);
      REQUIRE(set.contains(s.x, 1e-15));
    }
  }
}

TEST_CASE("divergence is reported with the iteration") {
  const auto q = make_quadratic(3, 5, 7, 0.5);
  StepSchedule sched;
  sched.horizon = 1000;
  sched.c2 = 30.0;
  try {
    run(Algorithm::ma_soba, q, FeasibleSet::whole_space(3), sched, {}, 0);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(std::string(e.what()).find("iteration") != std::string::npos);
  }
}

TEST_CASE("optional early stop on a small dual norm") {
  const auto q = QuadraticBilevel::trivial(2);
  StepSchedule sched;
  sched.horizon = 5000;
  RunOptions opt;
  opt.record_every = 1000;
  opt.stop_when_h_below = 1e-3;
  const auto r = run(Algorithm::ma_soba, q, FeasibleSet::whole_space(2), sched, {}, 0, opt,
                     initial_state(q, FeasibleSet::whole_space(2), v2(1, 1)));
  CHECK(r.stopped_early);
  CHECK(r.final_state.k < 5000);
  CHECK(r.final_state.h.norm() <= 1e-3);
  CHECK(r.trace.back().k == r.final_state.k);
}
