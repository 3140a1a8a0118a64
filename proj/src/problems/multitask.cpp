#include "bilevel/problems/multitask.hpp"

#include <utility>

#include "bilevel/errors.hpp"
#include "bilevel/problems/quadratic.hpp"

namespace bilevel {

MultiObjectiveProblem::MultiObjectiveProblem(
    std::vector<std::shared_ptr<const BilevelOracle>> objectives)
    : objectives_(std::move(objectives)) {
  if (objectives_.empty()) throw InvalidArgument("MultiObjectiveProblem: no objectives");
  for (const auto& o : objectives_) {
    if (!o) throw InvalidArgument("MultiObjectiveProblem: null objective");
    if (o->dim_x() != objectives_.front()->dim_x())
      throw InvalidArgument("MultiObjectiveProblem: objectives disagree on d_x");
  }
}

bool MultiObjectiveProblem::has_ground_truth() const {
  for (const auto& o : objectives_)
    if (!o->exact_available()) return false;
  return true;
}

Vector MultiObjectiveProblem::phi_values(const Vector& x) const {
  Vector out(static_cast<Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) out[static_cast<Index>(i)] = objectives_[i]->phi(x);
  return out;
}

MultiObjectiveProblem make_multitask(std::uint64_t seed, std::size_t n, Index d_x, Index d_y) {
  if (n < 1 || d_x < 1 || d_y < 1) throw InvalidArgument("make_multitask: sizes must be >= 1");
  std::vector<std::shared_ptr<const BilevelOracle>> objectives;
  objectives.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    objectives.push_back(
        std::make_shared<QuadraticBilevel>(make_quadratic(d_x, d_y, seed + i, 0.5)));
  }
  return MultiObjectiveProblem(std::move(objectives));
}

MultiObjectiveProblem make_two_task_toy() {
  const Matrix one = Matrix::Ones(1, 1);
  std::vector<std::shared_ptr<const BilevelOracle>> objectives;
  for (double target : {1.0, -1.0}) {
    objectives.push_back(std::make_shared<QuadraticBilevel>(one, one, Vector::Zero(1),
                                                            Vector::Constant(1, target), 0.0));
  }
  return MultiObjectiveProblem(std::move(objectives));
}

}  // namespace bilevel
