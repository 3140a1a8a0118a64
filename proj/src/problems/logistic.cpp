#include "bilevel/problems/logistic.hpp"

#include <utility>

#include "bilevel/errors.hpp"
#include "bilevel/kernels.hpp"

namespace bilevel {

namespace k = kernels::parallel;

LabeledData make_classification(RngStream& rng, const Vector& w_true, Index n) {
  const Index d = w_true.size();
  LabeledData data{RowMatrix(n, d), Vector(n)};
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) data.features(i, j) = rng.normal();
    const double score = data.features.row(i).dot(w_true) + 0.5 * rng.normal();
    data.labels[i] = score > 0.0 ? 1.0 : 0.0;
  }
  return data;
}

LogisticHyperparam::LogisticHyperparam(LabeledData train, LabeledData validation)
    : train_(std::move(train)), val_(std::move(validation)) {
  if (train_.size() < 1 || val_.size() < 1 || train_.dim() < 1 || train_.dim() != val_.dim())
    throw InvalidArgument("LogisticHyperparam: empty or mismatched data sets");
}

double LogisticHyperparam::upper_value(const Vector&, const Vector& y) const {
  return k::logistic_loss(val_.features, val_.labels, Vector(), y);
}

double LogisticHyperparam::lower_value(const Vector& x, const Vector& y) const {
  return k::logistic_loss(train_.features, train_.labels, Vector(), y) +
         0.5 * (x.array().exp() * y.array().square()).sum();
}

Vector LogisticHyperparam::upper_grad_x(const Vector& x, const Vector&) const {
  return Vector::Zero(x.size());
}

Vector LogisticHyperparam::upper_grad_y(const Vector&, const Vector& y) const {
  return k::logistic_grad(val_.features, val_.labels, Vector(), y);
}

Vector LogisticHyperparam::lower_grad_y(const Vector& x, const Vector& y) const {
  return k::logistic_grad(train_.features, train_.labels, Vector(), y) +
         (x.array().exp() * y.array()).matrix();
}

Vector LogisticHyperparam::lower_hvp(const Vector& x, const Vector& y, const Vector& z) const {
  return k::logistic_hvp(train_.features, Vector(), y, z) +
         (x.array().exp() * z.array()).matrix();
}

Vector LogisticHyperparam::lower_cross_jvp(const Vector& x, const Vector& y,
                                           const Vector& z) const {
  // d/dnu_j of (exp(nu) * omega)_j is exp(nu_j) omega_j; the Jacobian is diagonal.
  return (x.array().exp() * y.array() * z.array()).matrix();
}

Matrix LogisticHyperparam::lower_hessian(const Vector& x, const Vector& y) const {
  Matrix h = k::logistic_hessian(train_.features, Vector(), y);
  h.diagonal() += x.array().exp().matrix();
  return h;
}

LogisticHyperparam make_logistic(std::uint64_t seed, Index n_train, Index n_val, Index d) {
  if (n_train < 1 || n_val < 1 || d < 1) throw InvalidArgument("make_logistic: sizes must be >= 1");
  RngStream rng(seed, stream_id(StreamKind::data));
  const Vector w_true = rng.normal_vector(d);
  LabeledData train = make_classification(rng, w_true, n_train);
  LabeledData val = make_classification(rng, w_true, n_val);
  return LogisticHyperparam(std::move(train), std::move(val));
}

}  // namespace bilevel
