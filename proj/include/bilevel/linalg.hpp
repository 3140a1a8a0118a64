#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace bilevel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// Throws ContractViolation naming `what` unless v has `expected` entries.
void require_dim(const Vector& v, Index expected, std::string_view what);

/// Throws InvalidArgument naming `what` if v has a NaN or Inf entry.
void require_finite(const Vector& v, std::string_view what);

}  // namespace bilevel
