#include "bilevel/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "bilevel/errors.hpp"

namespace bilevel {

FeasibleSet FeasibleSet::whole_space(Index dim) {
  if (dim < 1) throw InvalidArgument("whole_space: dimension must be >= 1");
  return FeasibleSet(Kind::whole_space, dim);
}

FeasibleSet FeasibleSet::box(Vector lower, Vector upper) {
  if (lower.size() < 1 || lower.size() != upper.size())
    throw InvalidArgument("box: bounds must be non-empty and of equal dimension");
  if ((lower.array() > upper.array()).any()) throw InvalidArgument("box: lower > upper");
  FeasibleSet s(Kind::box, lower.size());
  s.a_ = std::move(lower);
  s.b_ = std::move(upper);
  return s;
}

FeasibleSet FeasibleSet::ball(Vector center, double radius) {
  if (center.size() < 1) throw InvalidArgument("ball: empty center");
  if (!(radius > 0.0)) throw InvalidArgument("ball: radius must be > 0");
  FeasibleSet s(Kind::ball, center.size());
  s.a_ = std::move(center);
  s.radius_ = radius;
  return s;
}

FeasibleSet FeasibleSet::simplex(Index n) {
  if (n < 1) throw InvalidArgument("simplex: n must be >= 1");
  return FeasibleSet(Kind::simplex, n);
}

bool FeasibleSet::contains(const Vector& p, double tol) const {
  if (p.size() != dim_) return false;
  switch (kind_) {
    case Kind::whole_space:
      return p.allFinite();
    case Kind::box:
      return ((p.array() >= a_.array() - tol) && (p.array() <= b_.array() + tol)).all();
    case Kind::ball:
      return (p - a_).norm() <= radius_ + tol;
    case Kind::simplex:
      return (p.array() >= -tol).all() && std::abs(p.sum() - 1.0) <= tol;
  }
  return false;
}

Vector project_simplex(const Vector& p) {
  const Index n = p.size();
  if (n < 1) throw InvalidArgument("project_simplex: empty input");
  if ((p.array() == p[0]).all()) return Vector::Constant(n, 1.0 / static_cast<double>(n));

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return p[a] > p[b]; });

  // Largest k with p_(k) - (sum_{j<=k} p_(j) - 1)/k > 0 fixes the threshold.
  double cumsum = 0.0;
  double threshold = 0.0;
  for (Index k = 0; k < n; ++k) {
    cumsum += p[order[static_cast<std::size_t>(k)]];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (p[order[static_cast<std::size_t>(k)]] - t > 0.0) threshold = t;
  }
  return (p.array() - threshold).max(0.0).matrix();
}

Vector project(const FeasibleSet& set, const Vector& p) {
  if (p.size() != set.dim()) {
    throw ContractViolation("project: point has dimension " + std::to_string(p.size()) +
                            ", set has " + std::to_string(set.dim()));
  }
  switch (set.kind()) {
    case FeasibleSet::Kind::whole_space:
      return p;
    case FeasibleSet::Kind::box:
      return p.cwiseMax(set.lower()).cwiseMin(set.upper());
    case FeasibleSet::Kind::ball: {
      const Vector d = p - set.center();
      const double r = d.norm();
      if (r <= set.radius()) return p;
      return set.center() + (set.radius() / r) * d;
    }
    case FeasibleSet::Kind::simplex:
      return project_simplex(p);
  }
  return p;
}

GradientMapping gradient_mapping(const FeasibleSet& set, const Vector& x, const Vector& g,
                                 double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("gradient_mapping: tau must be > 0");
  require_dim(g, set.dim(), "gradient_mapping g");
  if (set.kind() == FeasibleSet::Kind::whole_space) return {g, tau};
  return {(x - project(set, x - tau * g)) / tau, tau};
}

double eta_value(const FeasibleSet& set, const Vector& x, const Vector& h, double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("eta_value: tau must be > 0");
  require_dim(h, set.dim(), "eta_value h");
  const Vector step = project(set, x - tau * h) - x;
  return h.dot(step) + step.squaredNorm() / (2.0 * tau);
}

}  // namespace bilevel
