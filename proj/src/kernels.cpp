#include "bilevel/kernels.hpp"

#include <cmath>
#include <vector>

#include "bilevel/errors.hpp"

namespace bilevel::kernels {

double sigmoid(double m) {
  if (m >= 0.0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

double logistic_loss_term(double margin, double label) {
  const double softplus =
      margin > 0.0 ? margin + std::log1p(std::exp(-margin)) : std::log1p(std::exp(margin));
  return softplus - label * margin;
}

namespace {

void check(const RowMatrix& X, const Vector& weights, const Vector& w) {
  require_dim(w, X.cols(), "logistic kernel w");
  if (weights.size() != 0) require_dim(weights, X.rows(), "logistic kernel weights");
}

inline double weight_of(const Vector& weights, Index i) {
  return weights.size() == 0 ? 1.0 : weights[i];
}

Index block_count(Index rows) { return (rows + kBlockRows - 1) / kBlockRows; }

}  // namespace

namespace serial {

double logistic_loss(const RowMatrix& X, const Vector& labels, const Vector& weights,
                     const Vector& w) {
  check(X, weights, w);
  double total = 0.0;
  for (Index i = 0; i < X.rows(); ++i)
    total += weight_of(weights, i) * logistic_loss_term(X.row(i).dot(w), labels[i]);
  return total / static_cast<double>(X.rows());
}

Vector logistic_grad(const RowMatrix& X, const Vector& labels, const Vector& weights,
                     const Vector& w) {
  check(X, weights, w);
  Vector g = Vector::Zero(X.cols());
  for (Index i = 0; i < X.rows(); ++i) {
    const double r = weight_of(weights, i) * (sigmoid(X.row(i).dot(w)) - labels[i]);
    g += r * X.row(i).transpose();
  }
  return g / static_cast<double>(X.rows());
}

Vector logistic_hvp(const RowMatrix& X, const Vector& weights, const Vector& w, const Vector& z) {
  check(X, weights, w);
  require_dim(z, X.cols(), "logistic_hvp z");
  Vector out = Vector::Zero(X.cols());
  for (Index i = 0; i < X.rows(); ++i) {
    const double p = sigmoid(X.row(i).dot(w));
    out += (weight_of(weights, i) * p * (1.0 - p) * X.row(i).dot(z)) * X.row(i).transpose();
  }
  return out / static_cast<double>(X.rows());
}

Vector residual_dot(const RowMatrix& X, const Vector& labels, const Vector& w, const Vector& z) {
  require_dim(w, X.cols(), "residual_dot w");
  require_dim(z, X.cols(), "residual_dot z");
  Vector r(X.rows());
  for (Index i = 0; i < X.rows(); ++i)
    r[i] = (sigmoid(X.row(i).dot(w)) - labels[i]) * X.row(i).dot(z);
  return r;
}

Matrix logistic_hessian(const RowMatrix& X, const Vector& weights, const Vector& w) {
  check(X, weights, w);
  Matrix h = Matrix::Zero(X.cols(), X.cols());
  for (Index i = 0; i < X.rows(); ++i) {
    const double p = sigmoid(X.row(i).dot(w));
    h.noalias() += (weight_of(weights, i) * p * (1.0 - p)) * X.row(i).transpose() * X.row(i);
  }
  return h / static_cast<double>(X.rows());
}

}  // namespace serial

namespace parallel {

double logistic_loss(const RowMatrix& X, const Vector& labels, const Vector& weights,
                     const Vector& w) {
  check(X, weights, w);
  const Index nb = block_count(X.rows());
  std::vector<double> partial(static_cast<std::size_t>(nb), 0.0);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < nb; ++b) {
    const Index end = std::min(X.rows(), (b + 1) * kBlockRows);
    double s = 0.0;
    for (Index i = b * kBlockRows; i < end; ++i)
      s += weight_of(weights, i) * logistic_loss_term(X.row(i).dot(w), labels[i]);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total / static_cast<double>(X.rows());
}

Vector logistic_grad(const RowMatrix& X, const Vector& labels, const Vector& weights,
                     const Vector& w) {
  check(X, weights, w);
  const Index nb = block_count(X.rows());
  Matrix partial = Matrix::Zero(X.cols(), nb);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < nb; ++b) {
    const Index end = std::min(X.rows(), (b + 1) * kBlockRows);
    for (Index i = b * kBlockRows; i < end; ++i) {
      const double r = weight_of(weights, i) * (sigmoid(X.row(i).dot(w)) - labels[i]);
      partial.col(b) += r * X.row(i).transpose();
    }
  }
  Vector g = Vector::Zero(X.cols());
  for (Index b = 0; b < nb; ++b) g += partial.col(b);
  return g / static_cast<double>(X.rows());
}

Vector logistic_hvp(const RowMatrix& X, const Vector& weights, const Vector& w, const Vector& z) {
  check(X, weights, w);
  require_dim(z, X.cols(), "logistic_hvp z");
  const Index nb = block_count(X.rows());
  Matrix partial = Matrix::Zero(X.cols(), nb);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < nb; ++b) {
    const Index end = std::min(X.rows(), (b + 1) * kBlockRows);
    for (Index i = b * kBlockRows; i < end; ++i) {
      const double p = sigmoid(X.row(i).dot(w));
      partial.col(b) +=
          (weight_of(weights, i) * p * (1.0 - p) * X.row(i).dot(z)) * X.row(i).transpose();
    }
  }
  Vector out = Vector::Zero(X.cols());
  for (Index b = 0; b < nb; ++b) out += partial.col(b);
  return out / static_cast<double>(X.rows());
}

Vector residual_dot(const RowMatrix& X, const Vector& labels, const Vector& w, const Vector& z) {
  require_dim(w, X.cols(), "residual_dot w");
  require_dim(z, X.cols(), "residual_dot z");
  Vector r(X.rows());
  // No reduction: each row is written by exactly one thread.
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < X.rows(); ++i)
    r[i] = (sigmoid(X.row(i).dot(w)) - labels[i]) * X.row(i).dot(z);
  return r;
}

Matrix logistic_hessian(const RowMatrix& X, const Vector& weights, const Vector& w) {
  check(X, weights, w);
  const Index nb = block_count(X.rows());
  const Index d = X.cols();
  std::vector<Matrix> partial(static_cast<std::size_t>(nb), Matrix::Zero(d, d));
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < nb; ++b) {
    const Index end = std::min(X.rows(), (b + 1) * kBlockRows);
    Matrix& acc = partial[static_cast<std::size_t>(b)];
    for (Index i = b * kBlockRows; i < end; ++i) {
      const double p = sigmoid(X.row(i).dot(w));
      acc.noalias() += (weight_of(weights, i) * p * (1.0 - p)) * X.row(i).transpose() * X.row(i);
    }
  }
  Matrix h = Matrix::Zero(d, d);
  for (const Matrix& m : partial) h += m;
  return h / static_cast<double>(X.rows());
}

}  // namespace parallel

}  // namespace bilevel::kernels
