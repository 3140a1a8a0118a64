#include "bilevel/linalg.hpp"

#include <string>

#include "bilevel/errors.hpp"

namespace bilevel {

void require_dim(const Vector& v, Index expected, std::string_view what) {
  if (v.size() != expected) {
    throw ContractViolation(std::string(what) + ": expected dimension " + std::to_string(expected) +
                            ", got " + std::to_string(v.size()));
  }
}

void require_finite(const Vector& v, std::string_view what) {
  if (!v.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite entry");
}

}  // namespace bilevel
