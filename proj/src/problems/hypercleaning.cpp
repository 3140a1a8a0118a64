#include "bilevel/problems/hypercleaning.hpp"

#include <algorithm>
#include <utility>

#include "bilevel/errors.hpp"
#include "bilevel/kernels.hpp"

namespace bilevel {

namespace k = kernels::parallel;

HyperCleaning::HyperCleaning(LabeledData train, std::vector<bool> corrupted,
                             LabeledData validation, double regularization)
    : train_(std::move(train)), corrupted_(std::move(corrupted)), val_(std::move(validation)),
      c_r_(regularization) {
  if (train_.size() < 1 || val_.size() < 1 || train_.dim() != val_.dim())
    throw InvalidArgument("HyperCleaning: empty or mismatched data sets");
  if (static_cast<Index>(corrupted_.size()) != train_.size())
    throw InvalidArgument("HyperCleaning: corruption mask size differs from training set");
  if (!(c_r_ > 0.0)) throw InvalidArgument("HyperCleaning: regularization must be > 0");
}

Index HyperCleaning::corrupted_count() const {
  return static_cast<Index>(std::count(corrupted_.begin(), corrupted_.end(), true));
}

Vector HyperCleaning::sample_weights(const Vector& x) const {
  return x.unaryExpr([](double v) { return kernels::sigmoid(v); });
}

double HyperCleaning::upper_value(const Vector&, const Vector& y) const {
  return k::logistic_loss(val_.features, val_.labels, Vector(), y);
}

double HyperCleaning::lower_value(const Vector& x, const Vector& y) const {
  return k::logistic_loss(train_.features, train_.labels, sample_weights(x), y) +
         c_r_ * y.squaredNorm();
}

Vector HyperCleaning::upper_grad_x(const Vector& x, const Vector&) const {
  return Vector::Zero(x.size());
}

Vector HyperCleaning::upper_grad_y(const Vector&, const Vector& y) const {
  return k::logistic_grad(val_.features, val_.labels, Vector(), y);
}

Vector HyperCleaning::lower_grad_y(const Vector& x, const Vector& y) const {
  return k::logistic_grad(train_.features, train_.labels, sample_weights(x), y) + 2.0 * c_r_ * y;
}

Vector HyperCleaning::lower_hvp(const Vector& x, const Vector& y, const Vector& z) const {
  return k::logistic_hvp(train_.features, sample_weights(x), y, z) + 2.0 * c_r_ * z;
}

Vector HyperCleaning::lower_cross_jvp(const Vector& x, const Vector& y, const Vector& z) const {
  // Row i of grad^2_{nu W} g is sigmoid'(nu_i) (p_i - label_i) x_i' / N.
  const Vector r = k::residual_dot(train_.features, train_.labels, y, z);
  const Vector s = sample_weights(x);
  return (s.array() * (1.0 - s.array()) * r.array()).matrix() /
         static_cast<double>(train_.size());
}

Matrix HyperCleaning::lower_hessian(const Vector& x, const Vector& y) const {
  Matrix h = k::logistic_hessian(train_.features, sample_weights(x), y);
  h.diagonal().array() += 2.0 * c_r_;
  return h;
}

std::pair<double, double> mean_weights_by_corruption(const HyperCleaning& problem,
                                                     const Vector& nu) {
  require_dim(nu, problem.dim_x(), "mean_weights_by_corruption nu");
  double corrupted = 0.0;
  double clean = 0.0;
  Index n_corrupted = 0;
  for (Index i = 0; i < nu.size(); ++i) {
    const double w = kernels::sigmoid(nu[i]);
    if (problem.corruption_mask()[static_cast<std::size_t>(i)]) {
      corrupted += w;
      ++n_corrupted;
    } else {
      clean += w;
    }
  }
  const Index n_clean = nu.size() - n_corrupted;
  return {n_corrupted > 0 ? corrupted / static_cast<double>(n_corrupted) : 0.0,
          n_clean > 0 ? clean / static_cast<double>(n_clean) : 0.0};
}

HyperCleaning make_hypercleaning(std::uint64_t seed, Index n_train, Index n_val, Index d,
                                 double corruption_p) {
  if (n_train < 1 || n_val < 1 || d < 1)
    throw InvalidArgument("make_hypercleaning: sizes must be >= 1");
  if (!(corruption_p >= 0.0 && corruption_p <= 1.0))
    throw InvalidArgument("make_hypercleaning: corruption_p must lie in [0, 1]");
  RngStream rng(seed, stream_id(StreamKind::data));
  const Vector w_true = rng.normal_vector(d);
  LabeledData train = make_classification(rng, w_true, n_train);
  LabeledData val = make_classification(rng, w_true, n_val);
  std::vector<bool> mask(static_cast<std::size_t>(n_train), false);
  for (Index i = 0; i < n_train; ++i) {
    if (rng.uniform() < corruption_p) {
      mask[static_cast<std::size_t>(i)] = true;
      train.labels[i] = 1.0 - train.labels[i];
    }
  }
  return HyperCleaning(std::move(train), std::move(mask), std::move(val));
}

}  // namespace bilevel
