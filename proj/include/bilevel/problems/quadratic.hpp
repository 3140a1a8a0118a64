#pragma once

#include <cstdint>

#include <Eigen/Cholesky>

#include "bilevel/oracle.hpp"

namespace bilevel {

/// f(x, y) = 1/2 |y - y_t|^2 + rho/2 |x|^2,   g(x, y) = 1/2 y'Ay - y'(Bx + c),
/// with A symmetric positive definite. Everything has a closed form:
///   y*(x) = A^-1 (Bx + c),   z*(x) = A^-1 (y* - y_t),   grad Phi(x) = rho x + B' z*.
class QuadraticBilevel final : public BilevelOracle {
 public:
  /// Throws InvalidArgument if A is not symmetric positive definite or shapes disagree.
  QuadraticBilevel(Matrix A, Matrix B, Vector c, Vector y_target, double rho);

  /// A = I, B = I, c = 0, y_t = 0, rho = 0 in dimension d, so Phi(x) = |x|^2 / 2.
  static QuadraticBilevel trivial(Index d = 2);

  const Matrix& A() const noexcept { return A_; }
  const Matrix& B() const noexcept { return B_; }
  const Vector& c() const noexcept { return c_; }
  const Vector& y_target() const noexcept { return y_target_; }
  double rho() const noexcept { return rho_; }

  /// Smallest eigenvalue of A (strong convexity of g in y).
  double mu_g() const noexcept { return mu_g_; }
  /// Largest eigenvalue of A (smoothness of g in y).
  double lipschitz_grad_g() const noexcept { return l_g_; }

  Index dim_x() const override { return B_.cols(); }
  Index dim_y() const override { return A_.rows(); }

  double upper_value(const Vector& x, const Vector& y) const override;
  double lower_value(const Vector& x, const Vector& y) const override;
  Vector upper_grad_x(const Vector& x, const Vector& y) const override;
  Vector upper_grad_y(const Vector& x, const Vector& y) const override;
  Vector lower_grad_y(const Vector& x, const Vector& y) const override;
  Vector lower_hvp(const Vector& x, const Vector& y, const Vector& z) const override;
  Vector lower_cross_jvp(const Vector& x, const Vector& y, const Vector& z) const override;
  Matrix lower_hessian(const Vector& x, const Vector& y) const override;

  ReferencePoint reference(const Vector& x) const override;

 private:
  Matrix A_;
  Matrix B_;
  Vector c_;
  Vector y_target_;
  double rho_;
  double mu_g_ = 0.0;
  double l_g_ = 0.0;
  Eigen::LLT<Matrix> llt_;
};

/// Random instance, deterministic in `seed`: A = M'M + mu_min I with M_ij ~ N(0, 1/d_y),
/// B_ij ~ N(0, 1/d_x), c and y_t standard normal.
QuadraticBilevel make_quadratic(Index d_x, Index d_y, std::uint64_t seed, double mu_min,
                                double rho = 0.1);

}  // namespace bilevel
