#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "bilevel/oracle.hpp"

namespace bilevel {

/// n bilevel objectives (f_i, g_i) sharing the outer variable; inner dimensions may differ.
class MultiObjectiveProblem {
 public:
  /// Throws InvalidArgument if empty or the objectives disagree on d_x.
  explicit MultiObjectiveProblem(std::vector<std::shared_ptr<const BilevelOracle>> objectives);

  std::size_t size() const noexcept { return objectives_.size(); }
  Index dim_x() const noexcept { return objectives_.front()->dim_x(); }
  const BilevelOracle& objective(std::size_t i) const { return *objectives_.at(i); }
  std::shared_ptr<const BilevelOracle> objective_ptr(std::size_t i) const {
    return objectives_.at(i);
  }

  bool has_ground_truth() const;
  /// (Phi_1(x), ..., Phi_n(x))
  Vector phi_values(const Vector& x) const;

 private:
  std::vector<std::shared_ptr<const BilevelOracle>> objectives_;
};

/// n random quadratic objectives; objective i is make_quadratic(d_x, d_y, seed + i, 0.5),
/// so every objective has its own minimizer.
MultiObjectiveProblem make_multitask(std::uint64_t seed, std::size_t n, Index d_x, Index d_y);

/// Two one-dimensional objectives with Phi_1(x) = (x - 1)^2 / 2 and Phi_2(x) = (x + 1)^2 / 2
/// (A = B = 1, c = 0, rho = 0, y_t = +-1).
MultiObjectiveProblem make_two_task_toy();

}  // namespace bilevel
