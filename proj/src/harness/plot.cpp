#include "bilevel/harness/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "bilevel/errors.hpp"
#include "bilevel/validation.hpp"

namespace bilevel {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 50.0;

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<std::pair<double, double>> median_series(const std::vector<CsvTable>& tables,
                                                     const std::string& metric) {
  if (tables.empty()) throw InvalidArgument("plot: no csv input");
  std::map<double, std::vector<double>> by_k;
  for (const auto& t : tables) {
    const auto col = t.column(metric);
    if (!col) {
      std::string names;
      for (const auto& c : t.columns) names += (names.empty() ? "" : ", ") + c;
      throw InvalidArgument("unknown metric '" + metric + "'; available columns: " + names);
    }
    const auto kcol = t.column("k");
    if (!kcol) throw InvalidArgument("plot: csv has no 'k' column");
    for (const auto& row : t.rows) {
      if (!row[*kcol] || !row[*col] || !std::isfinite(*row[*col])) continue;
      by_k[*row[*kcol]].push_back(*row[*col]);
    }
  }
  std::vector<std::pair<double, double>> series;
  for (auto& [k, values] : by_k) series.emplace_back(k, median(std::move(values)));
  return series;
}

std::string render_svg(const std::vector<std::pair<double, double>>& series,
                       const std::string& metric) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [k, v] : series)
    if (v > 0.0) pts.emplace_back(k, std::log10(v));

  double kmin = 0.0, kmax = 1.0, lmin = 0.0, lmax = 1.0;
  if (!pts.empty()) {
    kmin = kmax = pts.front().first;
    lmin = lmax = pts.front().second;
    for (const auto& [k, l] : pts) {
      kmin = std::min(kmin, k);
      kmax = std::max(kmax, k);
      lmin = std::min(lmin, l);
      lmax = std::max(lmax, l);
    }
  }
  lmin = std::floor(lmin);
  lmax = std::ceil(lmax);
  if (lmax <= lmin) lmax = lmin + 1.0;
  if (kmax <= kmin) kmax = kmin + 1.0;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double k) { return kLeft + (k - kmin) / (kmax - kmin) * pw; };
  auto sy = [&](double l) { return kTop + (lmax - l) / (lmax - lmin) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth) + "\" height=\"" +
         fixed(kHeight) + "\" viewBox=\"0 0 " + fixed(kWidth) + " " + fixed(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fixed(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" " +
         "font-family=\"sans-serif\" font-size=\"14\">median " + escape(metric) + "</text>\n";
  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(kTop + ph) + "\" x2=\"" +
         fixed(kLeft + pw) + "\" y2=\"" + fixed(kTop + ph) + "\"/>\n";
  svg += "<line x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(kTop) + "\" x2=\"" + fixed(kLeft) +
         "\" y2=\"" + fixed(kTop + ph) + "\"/>\n";
  svg += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  const int step = std::max(1, static_cast<int>((lmax - lmin) / 8.0));
  for (int e = static_cast<int>(lmin); e <= static_cast<int>(lmax); e += step) {
    svg += "<text x=\"" + fixed(kLeft - 6) + "\" y=\"" + fixed(sy(e) + 4) +
           "\" text-anchor=\"end\">1e" + std::to_string(e) + "</text>\n";
  }
  svg += "<text x=\"" + fixed(kLeft) + "\" y=\"" + fixed(kTop + ph + 18) +
         "\" text-anchor=\"middle\">" + format_number(kmin) + "</text>\n";
  svg += "<text x=\"" + fixed(kLeft + pw) + "\" y=\"" + fixed(kTop + ph + 18) +
         "\" text-anchor=\"middle\">" + format_number(kmax) + "</text>\n";
  svg += "<text x=\"" + fixed(kLeft + pw / 2) + "\" y=\"" + fixed(kHeight - 10) +
         "\" text-anchor=\"middle\">iteration k</text>\n</g>\n";

  svg += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) svg += ' ';
    svg += fixed(sx(pts[i].first)) + "," + fixed(sy(pts[i].second));
  }
  svg += "\"/>\n</svg>\n";
  return svg;
}

std::vector<std::pair<double, double>> plot_traces(const std::vector<std::string>& csv_paths,
                                                   const std::string& metric,
                                                   const std::string& out_path) {
  std::vector<CsvTable> tables;
  for (const auto& p : csv_paths) tables.push_back(read_csv(p));
  auto series = median_series(tables, metric);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + out_path + "'");
  out << render_svg(series, metric);
  return series;
}

}  // namespace bilevel
