// stackmc: run the pricing experiments from the command line.
//
//   stackmc price --config configs/table1_european.json --output t1.csv
//   stackmc sweep --config configs/table2_paths_sweep.json --format json
//
// Flags override values read from --config. Validation failures exit with
// status 2 and a JSON object on stderr.

#include "stackmc/config_io.hpp"
#include "stackmc/harness.hpp"
#include "stackmc/report_io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace stackmc;

struct Overrides {
  std::string config;
  std::optional<std::string> model, payoff, fit, cv, format, output, axis;
  std::optional<std::size_t> paths, steps;
  std::optional<unsigned> folds, runs, threads;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> methods;
  std::vector<double> values;
  bool parallel = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON experiment configuration");
  cmd->add_option("--model", o.model, "bs | heston");
  cmd->add_option("--payoff", o.payoff, "european_call | asian_arithmetic | asian_geometric");
  cmd->add_option("--paths", o.paths, "number of Monte Carlo paths");
  cmd->add_option("--steps", o.steps, "monitoring dates / Euler steps");
  cmd->add_option("--folds", o.folds, "k-fold cross-validation with K folds");
  cmd->add_option("--cv", o.cv, "kfold:K | subsample:F");
  cmd->add_option("--fit", o.fit, "poly:L | pwlinear");
  cmd->add_option("--method", o.methods, "methods (comma separated)")->delimiter(',');
  cmd->add_option("--seed", o.seed, "base seed; run i uses seed + i");
  cmd->add_option("--runs", o.runs, "number of independent runs");
  cmd->add_option("--output", o.output, "output file (default: stdout or $STACKMC_OUTPUT_DIR)");
  cmd->add_option("--format", o.format, "csv | json");
  cmd->add_option("--threads", o.threads, "worker threads for --parallel");
  cmd->add_flag("--parallel", o.parallel, "execute runs concurrently");
}

ExperimentConfig build_config(const Overrides& o, std::optional<SweepSpec>& sweep_spec) {
  nlohmann::json j = o.config.empty() ? nlohmann::json::object() : read_json_file(o.config);
  if (o.model) j["model"] = *o.model;
  if (o.payoff) j["payoff"] = *o.payoff;
  if (o.paths) j["n_paths"] = *o.paths;
  if (o.steps) j["n_steps"] = *o.steps;
  if (o.cv) j["cv"] = *o.cv;
  if (o.folds) j["cv"] = "kfold:" + std::to_string(*o.folds);
  if (o.fit) j["fit"] = *o.fit;
  if (!o.methods.empty()) j["methods"] = o.methods;
  if (o.seed) {
    j["seed"] = *o.seed;
    j.erase("seeds");
  }
  if (o.runs) {
    j["runs"] = *o.runs;
    j.erase("seeds");
  }
  if (o.parallel) j["parallel"] = true;
  if (o.threads) j["threads"] = *o.threads;
  ExperimentConfig cfg = config_from_json(j);
  sweep_spec = sweep_from_json(j);
  cfg.validate();
  return cfg;
}

std::string resolve_output(const Overrides& o, ReportFormat format, const std::string& stem) {
  if (o.output) return *o.output;
  if (const char* dir = std::getenv("STACKMC_OUTPUT_DIR"); dir && *dir) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / (stem + (format == ReportFormat::csv ? ".csv" : ".json"))).string();
  }
  return {};
}

void print_table(const ExperimentReport& r, std::ostream& os) {
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %10s %10s %10s %10s %10s %12s\n", "method", "price", "ci",
                "runtime_s", "ratio", "total", "equivalent");
  os << line;
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof line, "%-22s %10.4f %10.4f %10.3f %10.2f %10.3f %12.2f\n",
                  to_string(row.method).c_str(), row.price, row.ci, row.runtime_s,
                  row.improvement_ratio, row.total_time, row.equivalent_time);
    os << line;
  }
}

int emit_error(const char* kind, const std::string& field, const std::string& message, int code) {
  nlohmann::json err{{"error", kind}, {"message", message}};
  if (!field.empty()) err["field"] = field;
  std::cerr << err.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stacked Monte Carlo option pricing experiments"};
  app.require_subcommand(1);
  Overrides price_opts, sweep_opts;
  CLI::App* price = app.add_subcommand("price", "run one experiment configuration");
  add_common(price, price_opts);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a configuration across one axis");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--axis", sweep_opts.axis, "n_paths | folds | train_fraction | fit_order");
  sweep_cmd->add_option("--values", sweep_opts.values, "axis values (comma separated)")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (price->parsed()) {
      std::optional<SweepSpec> unused;
      const ExperimentConfig cfg = build_config(price_opts, unused);
      const ReportFormat format = parse_format(price_opts.format.value_or("csv"));
      const ExperimentReport report = run_experiment(cfg);
      const std::string path = resolve_output(price_opts, format, "report");
      if (path.empty()) {
        std::cout << (format == ReportFormat::csv ? report_csv(report) : report_to_json(report).dump(2) + "\n");
      } else {
        emit_report(report, format, path);
        print_table(report, std::cout);
        std::cout << "wrote " << path << '\n';
      }
      return 0;
    }

    std::optional<SweepSpec> spec;
    const ExperimentConfig cfg = build_config(sweep_opts, spec);
    if (sweep_opts.axis) {
      SweepSpec s;
      s.axis = parse_axis(*sweep_opts.axis);
      s.values = sweep_opts.values.empty() && spec ? spec->values : sweep_opts.values;
      spec = s;
    } else if (!sweep_opts.values.empty()) {
      if (!spec) throw ConfigError("sweep.axis", "--values given without an axis");
      spec->values = sweep_opts.values;
    }
    if (!spec) throw ConfigError("sweep.axis", "no sweep axis in config or flags");
    const ReportFormat format = parse_format(sweep_opts.format.value_or("csv"));
    const auto points = sweep(cfg, spec->axis, spec->values);
    const std::string path = resolve_output(sweep_opts, format, "sweep_" + to_string(spec->axis));
    if (path.empty()) {
      std::cout << (format == ReportFormat::csv ? sweep_csv(points) : sweep_to_json(points).dump(2) + "\n");
    } else {
      emit_sweep(points, format, path);
      for (const auto& p : points) {
        std::cout << to_string(p.axis) << " = " << p.value << '\n';
        print_table(p.report, std::cout);
      }
      std::cout << "wrote " << path << '\n';
    }
    return 0;
  } catch (const ConfigError& e) {
    return emit_error("validation", e.field(), e.what(), 2);
  } catch (const std::exception& e) {
    return emit_error("runtime", "", e.what(), 1);
  }
}
