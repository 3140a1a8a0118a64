#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "bilevel/errors.hpp"
#include "bilevel/harness/config.hpp"
#include "bilevel/harness/experiment.hpp"
#include "bilevel/harness/plot.hpp"
#include "bilevel/problems/quadratic.hpp"
#include "bilevel/property_suite.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDivergence = 2;

std::vector<std::pair<std::string, std::string>> overrides_from(const std::vector<std::string>& extra) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extra.size(); ++i) {
    const std::string& flag = extra[i];
    if (flag.rfind("--", 0) != 0)
      throw bilevel::ConfigError("unexpected argument '" + flag + "'");
    std::string key = flag.substr(2);
    std::string value;
    const auto eq = key.find('=');
    if (eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (i + 1 >= extra.size()) throw bilevel::ConfigError("missing value for '" + flag + "'");
      value = extra[++i];
    }
    out.emplace_back(key, value);
  }
  return out;
}

void print_warnings(const bilevel::ExperimentConfig& cfg) {
  if (cfg.problem.kind != "quadratic" && cfg.problem.kind != "trivial") return;
  const auto inst = bilevel::build_problem(cfg);
  for (const auto& o : inst.objectives) {
    const auto& q = dynamic_cast<const bilevel::QuadraticBilevel&>(*o);
    for (const auto& w : cfg.step_schedule().warnings(q.mu_g(), q.lipschitz_grad_g()))
      std::cerr << "warning: " << w << "\n";
  }
}

std::vector<long> parse_ks(const std::string& text) {
  std::vector<long> ks;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const long k = std::stol(item, &used);
      if (used != item.size() || k < 1) throw std::invalid_argument(item);
      ks.push_back(k);
    } catch (const std::exception&) {
      throw bilevel::ConfigError("--ks: invalid horizon '" + item + "'");
    }
  }
  return ks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-loop stochastic bilevel optimization experiments"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment; writes per-seed CSV traces and summary.json");
  run_cmd->add_option("config", config_path, "TOML config file")->required();
  run_cmd->allow_extras();

  app.add_subcommand("validate", "Run the property suite");

  std::string rate_config;
  std::string ks_text = "1000,4000,16000";
  auto* rate_cmd = app.add_subcommand("rate", "Fit the decay rate of the mean squared gradient mapping");
  rate_cmd->add_option("config", rate_config, "TOML config file")->required();
  rate_cmd->add_option("--ks", ks_text, "Comma-separated horizons");
  rate_cmd->allow_extras();

  std::vector<std::string> csvs;
  std::string metric = "grad_map_sq";
  std::string svg_out = "plot.svg";
  auto* plot_cmd = app.add_subcommand("plot", "Plot the per-iteration median of a metric");
  plot_cmd->add_option("csv", csvs, "Trace CSV files")->required();
  plot_cmd->add_option("--metric", metric, "Column to plot");
  plot_cmd->add_option("--out", svg_out, "Output SVG path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const auto cfg = bilevel::load_config(config_path, overrides_from(run_cmd->remaining()));
      print_warnings(cfg);
      const auto result = bilevel::run_experiment(cfg);
      for (const auto& s : result.seeds)
        std::cout << "seed " << s.seed << ": " << s.status << " -> " << s.csv_path << "\n";
      std::cout << "summary: " << result.summary_path << "\n";
      return result.any_diverged ? kExitDivergence : kExitOk;
    }
    if (app.got_subcommand("validate")) {
      bool all = true;
      for (const auto& r : bilevel::run_property_suite()) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
        all = all && r.passed;
      }
      return all ? kExitOk : kExitConfig;
    }
    if (*rate_cmd) {
      const auto cfg = bilevel::load_config(rate_config, overrides_from(rate_cmd->remaining()));
      std::vector<std::pair<double, double>> means;
      const auto fit = bilevel::rate_experiment(cfg, parse_ks(ks_text), &means);
      for (const auto& [k, m] : means) std::cout << "K=" << k << " mean grad_map_sq=" << m << "\n";
      std::cout << "slope=" << fit.slope << " intercept=" << fit.intercept
                << " r_squared=" << fit.r_squared << "\n";
      return kExitOk;
    }
    if (*plot_cmd) {
      const auto series = bilevel::plot_traces(csvs, metric, svg_out);
      std::cout << "wrote " << svg_out << " (" << series.size() << " points)\n";
      return kExitOk;
    }
  } catch (const bilevel::DivergenceError& e) {
    std::cerr << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
