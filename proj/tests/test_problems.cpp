#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bilevel/errors.hpp"
#include "bilevel/oracle.hpp"
#include "bilevel/problems/hypercleaning.hpp"
#include "bilevel/problems/libsvm.hpp"
#include "bilevel/problems/logistic.hpp"
#include "bilevel/problems/multitask.hpp"
#include "bilevel/problems/quadratic.hpp"
#include "bilevel/rng.hpp"
#include "bilevel/validation.hpp"

using namespace bilevel;

namespace {

Vector v2(double a, double b) { return Vector{{a, b}}; }

bool near(const Vector& a, const Vector& b, double tol = 1e-12) {
  return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() <= tol;
}

double rel_err(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

QuadraticBilevel doubled() {
  return QuadraticBilevel(2.0 * Matrix::Identity(2, 2), Matrix::Identity(2, 2), Vector::Zero(2),
                          Vector::Zero(2), 0.0);
}

}  // namespace

TEST_CASE("trivial quadratic closed forms") {
  const auto q = QuadraticBilevel::trivial(2);
  CHECK(q.A() == Matrix::Identity(2, 2));
  CHECK(q.B() == Matrix::Identity(2, 2));
  CHECK(q.c() == Vector::Zero(2));
  CHECK(q.y_target() == Vector::Zero(2));
  CHECK(q.rho() == 0.0);
  CHECK(near(q.y_star(v2(1, 0)), v2(1, 0)));
  CHECK(near(q.z_star(v2(1, 0)), v2(1, 0)));
  CHECK(near(q.hypergrad(v2(1, -2)), v2(1, -2)));
  CHECK(q.phi(v2(1, 0)) == doctest::Approx(0.5));
  CHECK(q.phi(v2(0, 0)) == 0.0);

  const auto d = doubled();
  CHECK(near(d.y_star(v2(4, 0)), v2(2, 0)));
  CHECK(near(d.hypergrad(v2(4, 0)), v2(1, 0)));
}

TEST_CASE("random quadratic construction") {
  const auto q = make_quadratic(3, 5, 7, 0.5);
  CHECK(q.dim_x() == 3);
  CHECK(q.dim_y() == 5);
  CHECK(q.mu_g() >= 0.5);
  CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(q.A()).eigenvalues().minCoeff() >= 0.5 - 1e-12);
  const auto again = make_quadratic(3, 5, 7, 0.5);
  CHECK(q.A() == again.A());
  CHECK(q.B() == again.B());
  CHECK(q.c() == again.c());
  CHECK(q.y_target() == again.y_target());
  CHECK(make_quadratic(3, 5, 8, 0.5).A() != q.A());

  CHECK_THROWS_AS(make_quadratic(0, 5, 7, 0.5), InvalidArgument);
  CHECK_THROWS_AS(make_quadratic(3, 5, 7, 0.0), InvalidArgument);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(QuadraticBilevel(bad, Matrix::Identity(2, 2), Vector::Zero(2), Vector::Zero(2), 0.0),
                  InvalidArgument);
  Matrix asym = Matrix::Identity(2, 2);
  asym(0, 1) = 0.3;
  CHECK_THROWS_AS(QuadraticBilevel(asym, Matrix::Identity(2, 2), Vector::Zero(2), Vector::Zero(2), 0.0),
                  InvalidArgument);
}

TEST_CASE("seed-7 quadratic residuals and finite differences") {
  const auto q = make_quadratic(3, 5, 7, 0.5);
  RngStream rng(7, 77);
  for (int t = 0; t < 10; ++t) {
    const Vector x = rng.normal_vector(3);
    const auto r = q.reference(x);
    CHECK((q.A() * r.y_star - q.B() * x - q.c()).norm() <= 1e-10);
    CHECK((q.A() * r.z_star - (r.y_star - q.y_target())).norm() <= 1e-10);
    const Vector fd = finite_diff_grad([&](const Vector& v) { return q.phi(v); }, x, 1e-5);
    CHECK(rel_err(r.hypergrad, fd) <= 1e-5);
  }
}

TEST_CASE("value function is bounded below by its minimum") {
  const auto q = make_quadratic(3, 5, 7, 0.5);
  // Phi is a convex quadratic; its minimizer solves the normal equations.
  const Matrix S = q.A().llt().solve(q.B());
  const Vector r = q.A().llt().solve(q.c()) - q.y_target();
  const Matrix N = S.transpose() * S + q.rho() * Matrix::Identity(3, 3);
  const Vector x_min = N.llt().solve(-S.transpose() * r);
  const double phi_min = q.phi(x_min);
  CHECK(q.hypergrad(x_min).norm() <= 1e-10);
  RngStream rng(9, 1);
  for (int t = 0; t < 100; ++t) CHECK(q.phi(rng.normal_vector(3)) >= phi_min - 1e-12);
}

TEST_CASE("hyper-cleaning corruption") {
  const auto clean = make_hypercleaning(3, 200, 100, 10, 0.0);
  CHECK(clean.corrupted_count() == 0);
  for (bool c : clean.corruption_mask()) CHECK_FALSE(c);

  const auto half = make_hypercleaning(3, 200, 100, 10, 0.5);
  CHECK(std::abs(double(half.corrupted_count()) - 100.0) <= 3.0 * std::sqrt(200 * 0.25));
  // Flipped labels differ from the clean draw exactly where the mask is set.
  for (Index i = 0; i < 200; ++i)
    CHECK((half.train().labels[i] != clean.train().labels[i]) == half.corruption_mask()[i]);
  CHECK(half.validation().labels == clean.validation().labels);

  CHECK_THROWS_AS(make_hypercleaning(3, 200, 100, 10, 1.5), InvalidArgument);
  CHECK_THROWS_AS(make_hypercleaning(3, 0, 100, 10, 0.5), InvalidArgument);
}

TEST_CASE("multitask with one objective is the random quadratic") {
  const auto m = make_multitask(4, 1, 2, 2);
  REQUIRE(m.size() == 1);
  const auto& o = dynamic_cast<const QuadraticBilevel&>(m.objective(0));
  const auto q = make_quadratic(2, 2, 4, 0.5);
  CHECK(o.A() == q.A());
  CHECK(o.B() == q.B());
  const Vector x = v2(0.3, -0.7);
  CHECK(m.phi_values(x)[0] == q.phi(x));
  CHECK(m.has_ground_truth());
  CHECK_THROWS_AS(make_multitask(4, 0, 2, 2), InvalidArgument);
  CHECK_THROWS_AS(MultiObjectiveProblem({std::make_shared<QuadraticBilevel>(QuadraticBilevel::trivial(2)),
                                         std::make_shared<QuadraticBilevel>(QuadraticBilevel::trivial(3))}),
                  InvalidArgument);
}

TEST_CASE("two-task toy values") {
  const auto toy = make_two_task_toy();
  REQUIRE(toy.size() == 2);
  const Vector x = Vector::Constant(1, 0.0);
  CHECK(near(toy.phi_values(x), v2(0.5, 0.5)));
  CHECK(near(toy.phi_values(Vector::Constant(1, 1.0)), v2(0.0, 2.0)));
  CHECK(toy.objective(0).hypergrad(x)[0] == doctest::Approx(-1.0));
  CHECK(toy.objective(1).hypergrad(x)[0] == doctest::Approx(1.0));
}

TEST_CASE("logistic and hyper-cleaning inner solves and hypergradients") {
  const auto lg = make_logistic(5, 120, 60, 6);
  const auto hc = make_hypercleaning(5, 80, 60, 5, 0.3);
  RngStream rng(5, 3);
  const Vector nu = 0.5 * rng.normal_vector(6);
  const Vector w = rng.normal_vector(80);
  for (const auto& [oracle, x] : std::vector<std::pair<const BilevelOracle*, Vector>>{{&lg, nu}, {&hc, w}}) {
    const auto r = oracle->reference(x);
    CHECK(oracle->lower_grad_y(x, r.y_star).norm() <= 1e-8);
    CHECK((oracle->lower_hessian(x, r.y_star) * r.z_star - oracle->upper_grad_y(x, r.y_star)).norm() <= 1e-10);
    const Vector fd = finite_diff_grad([&](const Vector& v) { return oracle->phi(v); }, x, 1e-5);
    CHECK(rel_err(r.hypergrad, fd) <= 1e-4);
  }
}

TEST_CASE("logistic linear-system solution is bounded by L_f / mu_g") {
  const auto lg = make_logistic(2, 100, 50, 4);
  RngStream rng(2, 8);
  for (int t = 0; t < 5; ++t) {
    const Vector nu = rng.normal_vector(4);
    const auto r = lg.reference(nu);
    const double mu_g = nu.array().exp().minCoeff();
    // The validation log-loss gradient is bounded by the largest feature norm.
    const double l_f = lg.validation().features.rowwise().norm().maxCoeff();
    CHECK(r.z_star.norm() <= l_f / mu_g + 1e-12);
  }
}

TEST_CASE("oracle derivatives match finite differences") {
  const auto lg = make_logistic(6, 50, 30, 3);
  RngStream rng(6, 2);
  const Vector x = rng.normal_vector(3), y = rng.normal_vector(3), z = rng.normal_vector(3);
  auto f = [&](const Vector& xx, const Vector& yy) { return lg.upper_value(xx, yy); };
  auto g = [&](const Vector& xx, const Vector& yy) { return lg.lower_value(xx, yy); };
  CHECK(rel_err(lg.upper_grad_y(x, y), finite_diff_grad([&](const Vector& v) { return f(x, v); }, y)) <= 1e-7);
  CHECK(rel_err(lg.lower_grad_y(x, y), finite_diff_grad([&](const Vector& v) { return g(x, v); }, y)) <= 1e-7);
  // Directional derivatives of grad_y g give the Hessian and cross actions.
  const double e = 1e-6;
  const Vector hz = (lg.lower_grad_y(x, y + e * z) - lg.lower_grad_y(x, y - e * z)) / (2 * e);
  CHECK(rel_err(lg.lower_hvp(x, y, z), hz) <= 1e-6);
  Vector jz(3);
  for (Index i = 0; i < 3; ++i) {
    Vector xp = x, xm = x;
    xp[i] += e;
    xm[i] -= e;
    jz[i] = (lg.lower_grad_y(xp, y) - lg.lower_grad_y(xm, y)).dot(z) / (2 * e);
  }
  CHECK(rel_err(lg.lower_cross_jvp(x, y, z), jz) <= 1e-6);
}

TEST_CASE("libsvm reader") {
  std::istringstream in(
      "# header comment\n"
      "+1 1:0.5 3:2\n"
      "\n"
      "-1 2:1.5\n"
      "0 1:-1 3:1e-1\n");
  const auto data = read_libsvm(in);
  CHECK(data.size() == 3);
  CHECK(data.dim() == 3);
  CHECK(data.labels == Vector{{1.0, 0.0, 0.0}});
  CHECK(data.features(0, 0) == 0.5);
  CHECK(data.features(0, 1) == 0.0);
  CHECK(data.features(0, 2) == 2.0);
  CHECK(data.features(1, 1) == 1.5);
  CHECK(data.features(2, 2) == doctest::Approx(0.1));

  std::istringstream wide("1 2:1\n");
  CHECK(read_libsvm(wide, 5).dim() == 5);

  std::istringstream bad("1 2:1\n1 x\n");
  try {
    read_libsvm(bad);
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream zero("1 0:1\n");
  CHECK_THROWS_AS(read_libsvm(zero), InvalidArgument);
  std::istringstream narrow("1 4:1\n");
  CHECK_THROWS_AS(read_libsvm(narrow, 2), InvalidArgument);
  CHECK_THROWS_AS(read_libsvm_file("/nonexistent/file.svm"), InvalidArgument);
}
