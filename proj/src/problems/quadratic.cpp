#include "bilevel/problems/quadratic.hpp"

#include <cmath>
#include <utility>

#include <Eigen/Eigenvalues>

#include "bilevel/errors.hpp"

namespace bilevel {

QuadraticBilevel::QuadraticBilevel(Matrix A, Matrix B, Vector c, Vector y_target, double rho)
    : A_(std::move(A)), B_(std::move(B)), c_(std::move(c)), y_target_(std::move(y_target)),
      rho_(rho) {
  const Index dy = A_.rows();
  if (dy < 1 || A_.cols() != dy || B_.rows() != dy || B_.cols() < 1 || c_.size() != dy ||
      y_target_.size() != dy) {
    throw InvalidArgument("QuadraticBilevel: inconsistent shapes");
  }
  if (!(rho_ >= 0.0)) throw InvalidArgument("QuadraticBilevel: rho must be >= 0");
  if (!A_.isApprox(A_.transpose(), 1e-12)) throw InvalidArgument("QuadraticBilevel: A not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A_, Eigen::EigenvaluesOnly);
  mu_g_ = eig.eigenvalues().minCoeff();
  l_g_ = eig.eigenvalues().maxCoeff();
  if (!(mu_g_ > 0.0)) throw InvalidArgument("QuadraticBilevel: A not positive definite");
  llt_.compute(A_);
}

QuadraticBilevel QuadraticBilevel::trivial(Index d) {
  return QuadraticBilevel(Matrix::Identity(d, d), Matrix::Identity(d, d), Vector::Zero(d),
                          Vector::Zero(d), 0.0);
}

double QuadraticBilevel::upper_value(const Vector& x, const Vector& y) const {
  return 0.5 * (y - y_target_).squaredNorm() + 0.5 * rho_ * x.squaredNorm();
}

double QuadraticBilevel::lower_value(const Vector& x, const Vector& y) const {
  return 0.5 * y.dot(A_ * y) - y.dot(B_ * x + c_);
}

Vector QuadraticBilevel::upper_grad_x(const Vector& x, const Vector&) const { return rho_ * x; }

Vector QuadraticBilevel::upper_grad_y(const Vector&, const Vector& y) const {
  return y - y_target_;
}

Vector QuadraticBilevel::lower_grad_y(const Vector& x, const Vector& y) const {
  return A_ * y - B_ * x - c_;
}

Vector QuadraticBilevel::lower_hvp(const Vector&, const Vector&, const Vector& z) const {
  return A_ * z;
}

Vector QuadraticBilevel::lower_cross_jvp(const Vector&, const Vector&, const Vector& z) const {
  return -(B_.transpose() * z);
}

Matrix QuadraticBilevel::lower_hessian(const Vector&, const Vector&) const { return A_; }

ReferencePoint QuadraticBilevel::reference(const Vector& x) const {
  require_dim(x, dim_x(), "QuadraticBilevel::reference x");
  ReferencePoint r;
  r.y_star = llt_.solve(B_ * x + c_);
  r.z_star = llt_.solve(r.y_star - y_target_);
  r.hypergrad = rho_ * x + B_.transpose() * r.z_star;
  r.phi = upper_value(x, r.y_star);
  return r;
}

QuadraticBilevel make_quadratic(Index d_x, Index d_y, std::uint64_t seed, double mu_min,
                                double rho) {
  if (d_x < 1 || d_y < 1) throw InvalidArgument("make_quadratic: dimensions must be >= 1");
  if (!(mu_min > 0.0)) throw InvalidArgument("make_quadratic: mu_min must be > 0");
  RngStream rng(seed, stream_id(StreamKind::data));
  const Matrix M = rng.normal_matrix(d_y, d_y) / std::sqrt(static_cast<double>(d_y));
  Matrix A = M.transpose() * M;
  A = 0.5 * (A + A.transpose()).eval();
  A.diagonal().array() += mu_min;
  Matrix B = rng.normal_matrix(d_y, d_x) / std::sqrt(static_cast<double>(d_x));
  Vector c = rng.normal_vector(d_y);
  Vector y_t = rng.normal_vector(d_y);
  return QuadraticBilevel(std::move(A), std::move(B), std::move(c), std::move(y_t), rho);
}

}  // namespace bilevel
