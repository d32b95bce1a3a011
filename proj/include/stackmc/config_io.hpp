#pragma once

#include "stackmc/harness.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace stackmc {

// Experiment configuration files are JSON objects. Every key is optional and
// falls back to the ExperimentConfig default; unknown keys are rejected.
//
//   model        "bs" | "heston"
//   bs           {s0, strike, r, sigma, maturity}
//   heston       {s0, strike, r, maturity, v0, kappa, theta, xi, varrho}
//   payoff       "european_call" | "asian_arithmetic" | "asian_geometric"
//   n_paths      integer
//   n_steps      integer (monitoring dates / Euler steps)
//   spacing      "equal"
//   cv           "kfold:K" | "subsample:F"
//   fit          "poly:L" | "pwlinear"
//   methods      array of "mc", "antithetic", "stackmc", "geom_cv",
//                "stackmc_plus_geom_cv"
//   runs         integer
//   seed         base seed; run i uses seed + i
//   seeds        explicit seed list (length must equal runs)
//   parallel     bool
//   threads      integer, 0 = hardware concurrency
//   sweep        {axis: "n_paths"|"folds"|"train_fraction"|"fit_order",
//                 values: [numbers]}   read by the sweep subcommand only

struct SweepSpec {
  SweepAxis axis = SweepAxis::n_paths;
  std::vector<double> values;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
std::optional<SweepSpec> sweep_from_json(const nlohmann::json& j);

/// Reads and parses a JSON file; errors carry the path.
nlohmann::json read_json_file(const std::string& path);

}  // namespace stackmc
