#pragma once

#include "stackmc/models.hpp"
#include "stackmc/stack_estimator.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stackmc {

enum class ModelKind { bs, heston };
enum class PayoffKind { european_call, asian_arithmetic, asian_geometric };
enum class Method { mc, antithetic, stackmc, geom_cv, stackmc_plus_geom_cv };

std::string to_string(ModelKind m);
std::string to_string(PayoffKind p);
std::string to_string(Method m);
ModelKind parse_model(const std::string& s);
PayoffKind parse_payoff(const std::string& s);
Method parse_method(const std::string& s);

/// Validation failure tied to a configuration field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  ModelKind model = ModelKind::bs;
  BSParams bs{};
  HestonParams heston{};
  PayoffKind payoff = PayoffKind::european_call;
  std::size_t n_paths = 100000;
  std::size_t n_steps = 1;
  /// Only "equal" spacing over (0, T] is supported.
  std::string spacing = "equal";
  CrossValidationScheme scheme = CrossValidationScheme::kfold(2);
  FitSpec fit = FitSpec::poly(4);
  std::vector<Method> methods{Method::mc, Method::stackmc};
  unsigned runs = 10;
  std::uint64_t base_seed = 0;
  /// Explicit per-run seeds; when empty, runs use base_seed .. base_seed+runs-1.
  std::vector<std::uint64_t> seeds;
  /// Runs execute concurrently. Only timing fields may differ.
  bool parallel = false;
  unsigned threads = 0;  ///< worker count for parallel runs; 0 = hardware

  /// Throws ConfigError on the first invalid field.
  void validate() const;
  std::vector<std::uint64_t> resolved_seeds() const;
  double maturity() const noexcept;
  double discount() const noexcept;
};

struct MethodResult {
  Method method = Method::mc;
  double price = 0.0;
  double ci = 0.0;
  double runtime_s = 0.0;
  double alpha = 0.0;
  double rho = 0.0;
  bool fell_back = false;

  friend bool operator==(const MethodResult&, const MethodResult&) = default;
};

/// One run of every configured method on one seed. `results` follows the
/// configured method order; `baseline` is the plain MC estimate on the same
/// draws, computed whether or not mc is among the methods.
struct RunResult {
  std::uint64_t seed = 0;
  MethodResult baseline;
  std::vector<MethodResult> results;
  double heston_clamp_rate = 0.0;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// Run-averaged row. Identities that hold exactly:
///   abs_improvement  = ci_mc - ci
///   improvement_ratio = ci_mc / ci
///   equivalent_time  = mc_runtime * improvement_ratio^2
/// total_time is mc_runtime + runtime_s for methods that post-process the MC
/// draws (stackmc, geom_cv, stackmc_plus_geom_cv), runtime_s otherwise.
/// StackMC runtime is the stacking cost after simulation.
struct ReportRow {
  Method method = Method::mc;
  double price = 0.0;
  double ci = 0.0;
  double runtime_s = 0.0;
  double alpha = 0.0;
  double rho = 0.0;
  double abs_improvement = 0.0;
  double improvement_ratio = 0.0;
  double total_time = 0.0;
  double equivalent_time = 0.0;
  double time_units = 0.0;  ///< runtime_s / mc runtime
  unsigned fallbacks = 0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<std::uint64_t> seeds;
  double mc_ci = 0.0;
  double mc_runtime_s = 0.0;
  std::vector<ReportRow> rows;
  std::vector<RunResult> runs;
};

RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed);

/// Runs every seed and averages per method.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Builds the averaged rows from per-run results.
std::vector<ReportRow> aggregate(const std::vector<Method>& methods,
                                 const std::vector<RunResult>& runs, double& mc_ci,
                                 double& mc_runtime);

enum class SweepAxis { n_paths, folds, train_fraction, fit_order };
std::string to_string(SweepAxis a);
SweepAxis parse_axis(const std::string& s);

struct SweepPoint {
  SweepAxis axis = SweepAxis::n_paths;
  double value = 0.0;
  ExperimentReport report;
};

/// Applies an axis value to a copy of the template config.
ExperimentConfig apply_axis(const ExperimentConfig& base, SweepAxis axis, double value);

std::vector<SweepPoint> sweep(const ExperimentConfig& base, SweepAxis axis,
                              const std::vector<double>& values);

}  // namespace stackmc
