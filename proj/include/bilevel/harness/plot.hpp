#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bilevel/harness/csv.hpp"

namespace bilevel {

/// (k, median of `metric` over the tables that have a value at k), sorted by k.
/// Throws InvalidArgument listing the available columns if `metric` is missing.
std::vector<std::pair<double, double>> median_series(const std::vector<CsvTable>& tables,
                                                     const std::string& metric);

/// Self-contained SVG with a log-scale y axis and one polyline; non-positive values are
/// dropped from the line.
std::string render_svg(const std::vector<std::pair<double, double>>& series,
                       const std::string& metric);

/// Reads the CSVs, plots the per-k median of `metric` and writes `out_path`.
/// Returns the plotted series.
std::vector<std::pair<double, double>> plot_traces(const std::vector<std::string>& csv_paths,
                                                   const std::string& metric,
                                                   const std::string& out_path);

}  // namespace bilevel
