#pragma once

#include <cstdint>

#include "bilevel/oracle.hpp"

namespace bilevel {

/// Binary classification data; labels are 0 or 1.
struct LabeledData {
  RowMatrix features;
  Vector labels;

  Index size() const noexcept { return features.rows(); }
  Index dim() const noexcept { return features.cols(); }
};

/// Synthetic linearly-separable-with-noise data: x ~ N(0, I_d),
/// label = 1[<w_true, x> + 0.5 noise > 0]. Deterministic in `rng`.
LabeledData make_classification(RngStream& rng, const Vector& w_true, Index n);

/// Per-feature regularization tuning for logistic regression.
///   outer x = nu (log-regularizers), inner y = omega (weights)
///   f(nu, omega) = mean validation log-loss
///   g(nu, omega) = mean training log-loss + 1/2 omega' diag(exp(nu)) omega
class LogisticHyperparam final : public BilevelOracle {
 public:
  LogisticHyperparam(LabeledData train, LabeledData validation);

  const LabeledData& train() const noexcept { return train_; }
  const LabeledData& validation() const noexcept { return val_; }

  Index dim_x() const override { return train_.dim(); }
  Index dim_y() const override { return train_.dim(); }

  double upper_value(const Vector& x, const Vector& y) const override;
  double lower_value(const Vector& x, const Vector& y) const override;
  Vector upper_grad_x(const Vector& x, const Vector& y) const override;
  Vector upper_grad_y(const Vector& x, const Vector& y) const override;
  Vector lower_grad_y(const Vector& x, const Vector& y) const override;
  Vector lower_hvp(const Vector& x, const Vector& y, const Vector& z) const override;
  Vector lower_cross_jvp(const Vector& x, const Vector& y, const Vector& z) const override;
  Matrix lower_hessian(const Vector& x, const Vector& y) const override;

 private:
  LabeledData train_;
  LabeledData val_;
};

LogisticHyperparam make_logistic(std::uint64_t seed, Index n_train, Index n_val, Index d);

}  // namespace bilevel
