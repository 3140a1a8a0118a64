#include "bilevel/harness/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bilevel/errors.hpp"

namespace bilevel {

std::string_view csv_header() {
  return "k,oracle_calls,wall_ms,phi,grad_map_sq,h_err_sq,y_err_sq,z_err_sq,lambda_dist_sq";
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

void append_optional(std::string& out, const std::optional<double>& v) {
  out += ',';
  if (v) out += format_number(*v);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

std::string format_csv(const std::vector<TraceRecord>& trace) {
  std::string out(csv_header());
  out += '\n';
  for (const auto& r : trace) {
    out += std::to_string(r.k);
    out += ',';
    out += std::to_string(r.oracle_calls);
    out += ',';
    out += format_number(r.wall_ms);
    append_optional(out, r.phi);
    append_optional(out, r.grad_map_sq);
    append_optional(out, r.h_err_sq);
    append_optional(out, r.y_err_sq);
    append_optional(out, r.z_err_sq);
    append_optional(out, r.lambda_dist_sq);
    out += '\n';
  }
  return out;
}

void write_csv(const std::string& path, const std::vector<TraceRecord>& trace) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << format_csv(trace);
  if (!out) throw Error("write failed for '" + path + "'");
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  return std::nullopt;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (table.columns.empty()) {
      for (auto c : cells) table.columns.emplace_back(c);
      continue;
    }
    if (cells.size() != table.columns.size())
      throw InvalidArgument("csv line " + std::to_string(line_no) + ": expected " +
                            std::to_string(table.columns.size()) + " fields, got " +
                            std::to_string(cells.size()));
    std::vector<std::optional<double>> row;
    for (auto c : cells) {
      if (c.empty()) {
        row.emplace_back();
        continue;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size())
        throw InvalidArgument("csv line " + std::to_string(line_no) + ": non-numeric field '" +
                              std::string(c) + "'");
      row.emplace_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.columns.empty()) throw InvalidArgument("csv: missing header");
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open csv '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

}  // namespace bilevel
