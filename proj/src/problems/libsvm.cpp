#include "bilevel/problems/libsvm.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "bilevel/errors.hpp"

namespace bilevel {

namespace {

struct Row {
  double label;
  std::vector<std::pair<Index, double>> entries;
};

double parse_double(const std::string& token, std::size_t line) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+' && last - first > 1 && first[1] != '-') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw InvalidArgument("libsvm line " + std::to_string(line) + ": bad number '" + token + "'");
  return v;
}

}  // namespace

LabeledData read_libsvm(std::istream& in, Index dim) {
  std::vector<Row> rows;
  Index max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) continue;
    Row row{parse_double(token, line_no), {}};
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos)
        throw InvalidArgument("libsvm line " + std::to_string(line_no) + ": expected idx:value");
      const double idx = parse_double(token.substr(0, colon), line_no);
      const auto index = static_cast<Index>(idx);
      if (index < 1 || static_cast<double>(index) != idx)
        throw InvalidArgument("libsvm line " + std::to_string(line_no) + ": index must be >= 1");
      row.entries.emplace_back(index - 1, parse_double(token.substr(colon + 1), line_no));
      max_index = std::max(max_index, index);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument("libsvm: no samples");
  if (dim == 0) dim = max_index;
  if (max_index > dim)
    throw InvalidArgument("libsvm: feature index " + std::to_string(max_index) +
                          " exceeds dimension " + std::to_string(dim));

  LabeledData data{RowMatrix::Zero(static_cast<Index>(rows.size()), dim),
                   Vector(static_cast<Index>(rows.size()))};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Index>(i);
    data.labels[r] = rows[i].label > 0.0 ? 1.0 : 0.0;
    for (const auto& [j, v] : rows[i].entries) data.features(r, j) = v;
  }
  return data;
}

LabeledData read_libsvm_file(const std::string& path, Index dim) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open libsvm file '" + path + "'");
  return read_libsvm(in, dim);
}

}  // namespace bilevel
