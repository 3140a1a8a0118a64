#pragma once

#include "bilevel/linalg.hpp"

namespace bilevel {

/// Closed convex set with a cheap Euclidean projection.
class FeasibleSet {
 public:
  enum class Kind { whole_space, box, ball, simplex };

  static FeasibleSet whole_space(Index dim);
  /// Requires lower <= upper componentwise.
  static FeasibleSet box(Vector lower, Vector upper);
  /// Requires radius > 0.
  static FeasibleSet ball(Vector center, double radius);
  /// Probability simplex in R^n, n >= 1.
  static FeasibleSet simplex(Index n);

  Kind kind() const noexcept { return kind_; }
  Index dim() const noexcept { return dim_; }
  const Vector& lower() const noexcept { return a_; }
  const Vector& upper() const noexcept { return b_; }
  const Vector& center() const noexcept { return a_; }
  double radius() const noexcept { return radius_; }

  bool contains(const Vector& p, double tol = 1e-12) const;

 private:
  FeasibleSet(Kind kind, Index dim) : kind_(kind), dim_(dim) {}

  Kind kind_;
  Index dim_;
  Vector a_;
  Vector b_;
  double radius_ = 0.0;
};

/// Euclidean projection of p onto `set`.
Vector project(const FeasibleSet& set, const Vector& p);

/// Projection onto the probability simplex by sort-then-threshold. Ties in the sort are
/// broken by index; an all-equal input maps to the exact uniform vector.
Vector project_simplex(const Vector& p);

struct GradientMapping {
  Vector value;
  double tau = 1.0;
};

/// (1/tau) (x - P(x - tau g)). Equals g on the whole space.
GradientMapping gradient_mapping(const FeasibleSet& set, const Vector& x, const Vector& g,
                                 double tau);

/// <h, x+ - x> + |x+ - x|^2 / (2 tau) with x+ = P(x - tau h). Never positive.
double eta_value(const FeasibleSet& set, const Vector& x, const Vector& h, double tau);

}  // namespace bilevel
