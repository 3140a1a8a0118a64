#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "bilevel/linalg.hpp"

namespace bilevel {

/// Central differences, one coordinate at a time. Throws InvalidArgument if step <= 0 or an
/// evaluation is non-finite.
Vector finite_diff_grad(const std::function<double(const Vector&)>& fn, const Vector& x,
                        double step = 1e-5);

/// Projection onto the probability simplex by enumerating every support set, keeping the
/// feasible candidates and returning the closest one. Exponential in n; n <= 12 only
/// (UnsupportedOperation beyond).
Vector simplex_kkt_bruteforce(const Vector& p);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  /// (log K, log metric) pairs used in the fit.
  std::vector<std::pair<double, double>> points;
};

/// Median of the values (mean of the two middle ones for an even count). Throws
/// InvalidArgument when empty.
double median(std::vector<double> values);

/// Least-squares line through (log K, log metric). Needs >= 3 distinct K and positive
/// metrics (InvalidArgument otherwise). A constant metric gives slope 0 and r^2 = 1.
RateFit fit_rate(const std::vector<std::pair<double, double>>& runs);

}  // namespace bilevel
