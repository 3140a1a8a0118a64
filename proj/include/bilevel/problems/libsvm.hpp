#pragma once

#include <istream>
#include <string>

#include "bilevel/problems/logistic.hpp"

namespace bilevel {

/// Reads LIBSVM text ("label idx:val idx:val ..." per line, 1-based indices) into dense
/// features. Labels <= 0 map to 0, positive labels to 1. `dim` = 0 infers the width from the
/// largest index. Blank lines and '#' comments are skipped.
/// Throws InvalidArgument with the line number on malformed input.
LabeledData read_libsvm(std::istream& in, Index dim = 0);
LabeledData read_libsvm_file(const std::string& path, Index dim = 0);

}  // namespace bilevel
