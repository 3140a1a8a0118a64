#include "bilevel/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "bilevel/errors.hpp"

namespace bilevel {

Vector finite_diff_grad(const std::function<double(const Vector&)>& fn, const Vector& x,
                        double step) {
  if (!(step > 0.0)) throw InvalidArgument("finite_diff_grad: step must be > 0");
  Vector g(x.size());
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = fn(probe);
    probe[i] = x[i] - step;
    const double down = fn(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down))
      throw InvalidArgument("finite_diff_grad: non-finite evaluation at coordinate " +
                            std::to_string(i));
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

Vector simplex_kkt_bruteforce(const Vector& p) {
  const Index n = p.size();
  if (n < 1) throw InvalidArgument("simplex_kkt_bruteforce: empty input");
  if (n > 12) throw UnsupportedOperation("simplex_kkt_bruteforce: n > 12");

  Vector best;
  double best_dist = std::numeric_limits<double>::infinity();
  const unsigned long subsets = 1ul << n;
  for (unsigned long mask = 1; mask < subsets; ++mask) {
    // On support S the KKT system gives lambda_i = p_i - t with t = (sum_S p - 1) / |S|.
    double sum = 0.0;
    int count = 0;
    for (Index i = 0; i < n; ++i) {
      if (mask & (1ul << i)) {
        sum += p[i];
        ++count;
      }
    }
    const double t = (sum - 1.0) / count;
    Vector candidate = Vector::Zero(n);
    bool feasible = true;
    for (Index i = 0; i < n && feasible; ++i) {
      if (mask & (1ul << i)) {
        candidate[i] = p[i] - t;
        feasible = candidate[i] >= 0.0;
      }
    }
    if (!feasible) continue;
    const double dist = (candidate - p).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = std::move(candidate);
    }
  }
  return best;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& runs) {
  std::set<double> distinct;
  RateFit fit;
  for (const auto& [k, metric] : runs) {
    if (!(k > 0.0)) throw InvalidArgument("fit_rate: K must be positive");
    if (!(metric > 0.0)) throw InvalidArgument("fit_rate: metric must be positive");
    distinct.insert(k);
    fit.points.emplace_back(std::log(k), std::log(metric));
  }
  if (distinct.size() < 3) throw InvalidArgument("fit_rate: need at least 3 distinct K values");

  const double m = static_cast<double>(fit.points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [lx, ly] : fit.points) {
    mx += lx;
    my += ly;
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [lx, ly] : fit.points) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
    syy += (ly - my) * (ly - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  // All residual variance is explained when the metric does not vary at all.
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

}  // namespace bilevel
