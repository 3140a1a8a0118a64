#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bilevel/masoba.hpp"

namespace bilevel {

/// `k,oracle_calls,wall_ms,phi,grad_map_sq,h_err_sq,y_err_sq,z_err_sq,lambda_dist_sq`
std::string_view csv_header();

/// Shortest decimal string that parses back to the same double.
std::string format_number(double v);

/// Header line plus one LF-terminated row per record; absent metrics are empty fields.
std::string format_csv(const std::vector<TraceRecord>& trace);

/// Throws Error if the file cannot be written.
void write_csv(const std::string& path, const std::vector<TraceRecord>& trace);

/// A parsed CSV: named columns, one optional value per cell.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;

  /// Index of `name`, or std::nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
};

/// Throws InvalidArgument on malformed input (ragged rows, non-numeric cells).
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::string& path);

}  // namespace bilevel
