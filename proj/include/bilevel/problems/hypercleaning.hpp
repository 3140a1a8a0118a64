#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bilevel/problems/logistic.hpp"

namespace bilevel {

/// Sample reweighting on a training set with corrupted labels (binary logistic model).
///   outer x = nu, one weight logit per training sample; sample weight = sigmoid(nu_i)
///   inner y = W, the regression coefficients
///   f(nu, W) = mean validation log-loss
///   g(nu, W) = (1/N) sum_i sigmoid(nu_i) loss_i(W) + C_r |W|^2
class HyperCleaning final : public BilevelOracle {
 public:
  static constexpr double kDefaultRegularization = 0.2;

  /// `corrupted[i]` records whether training label i was flipped.
  HyperCleaning(LabeledData train, std::vector<bool> corrupted, LabeledData validation,
                double regularization = kDefaultRegularization);

  const LabeledData& train() const noexcept { return train_; }
  const LabeledData& validation() const noexcept { return val_; }
  const std::vector<bool>& corruption_mask() const noexcept { return corrupted_; }
  double regularization() const noexcept { return c_r_; }
  Index corrupted_count() const;

  Index dim_x() const override { return train_.size(); }
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
  Vector sample_weights(const Vector& x) const;

  LabeledData train_;
  std::vector<bool> corrupted_;
  LabeledData val_;
  double c_r_;
};

/// Mean sample weight sigmoid(nu_i) over corrupted (first) and clean (second) samples.
std::pair<double, double> mean_weights_by_corruption(const HyperCleaning& problem,
                                                     const Vector& nu);

/// Flips each training label independently with probability corruption_p; validation stays clean.
HyperCleaning make_hypercleaning(std::uint64_t seed, Index n_train, Index n_val, Index d,
                                 double corruption_p);

}  // namespace bilevel
