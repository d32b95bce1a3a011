#include "stackmc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <thread>

namespace stackmc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t x = seed ^ (tag * 0x9e3779b97f4a7c15ULL);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kPartitionTag = 1;
constexpr std::uint64_t kAntitheticTag = 2;

bool post_processes_mc(Method m) {
  return m == Method::stackmc || m == Method::geom_cv || m == Method::stackmc_plus_geom_cv;
}

bool contains(const std::vector<Method>& v, Method m) {
  return std::find(v.begin(), v.end(), m) != v.end();
}

MethodResult to_result(Method m, const StackEstimate& e, double runtime) {
  return MethodResult{m, e.price, e.ci_halfwidth, runtime, e.alpha, e.rho, e.fell_back};
}

// Draws and payoffs for one seed.
struct Simulation {
  PathIncrements features;
  std::optional<PathIncrements> variance_drivers;
  PayoffSamples payoff;
  double clamp_rate = 0.0;
};

Simulation simulate(const ExperimentConfig& cfg, std::uint64_t seed, bool antithetic) {
  const std::size_t n = antithetic ? cfg.n_paths / 2 : cfg.n_paths;
  Simulation sim;
  if (cfg.model == ModelKind::heston) {
    CorrelatedPair pair = draw_correlated(seed, n, cfg.n_steps, cfg.heston.varrho);
    if (antithetic) {
      pair.w = antithetic_extend(pair.w);
      pair.b = antithetic_extend(pair.b);
    }
    const double dt = cfg.heston.maturity / static_cast<double>(cfg.n_steps);
    const HestonPaths paths = heston_paths(cfg.heston, pair, dt);
    sim.payoff = call_payoff(cfg.payoff == PayoffKind::european_call ? paths.terminal : paths.average,
                             cfg.heston.strike);
    sim.clamp_rate = paths.clamp_rate();
    sim.features = std::move(pair.w);
    sim.variance_drivers = std::move(pair.b);
    return sim;
  }
  PathIncrements x = draw_normals(seed, n, cfg.n_steps);
  if (antithetic) x = antithetic_extend(x);
  switch (cfg.payoff) {
    case PayoffKind::european_call:
      sim.payoff = bs_terminal_payoff(cfg.bs, x);
      break;
    case PayoffKind::asian_arithmetic:
      sim.payoff = bs_asian_payoff(cfg.bs, MonitoringSchedule::equally_spaced(cfg.n_steps, cfg.bs.maturity), x);
      break;
    case PayoffKind::asian_geometric:
      sim.payoff = geometric_asian_payoff(
          cfg.bs, MonitoringSchedule::equally_spaced(cfg.n_steps, cfg.bs.maturity), x);
      break;
  }
  sim.features = std::move(x);
  return sim;
}

}  // namespace

std::string to_string(ModelKind m) { return m == ModelKind::bs ? "bs" : "heston"; }

std::string to_string(PayoffKind p) {
  switch (p) {
    case PayoffKind::european_call: return "european_call";
    case PayoffKind::asian_arithmetic: return "asian_arithmetic";
    case PayoffKind::asian_geometric: return "asian_geometric";
  }
  return "?";
}

std::string to_string(Method m) {
  switch (m) {
    case Method::mc: return "mc";
    case Method::antithetic: return "antithetic";
    case Method::stackmc: return "stackmc";
    case Method::geom_cv: return "geom_cv";
    case Method::stackmc_plus_geom_cv: return "stackmc_plus_geom_cv";
  }
  return "?";
}

ModelKind parse_model(const std::string& s) {
  if (s == "bs") return ModelKind::bs;
  if (s == "heston") return ModelKind::heston;
  throw ConfigError("model", "expected 'bs' or 'heston', got '" + s + "'");
}

PayoffKind parse_payoff(const std::string& s) {
  if (s == "european_call") return PayoffKind::european_call;
  if (s == "asian_arithmetic") return PayoffKind::asian_arithmetic;
  if (s == "asian_geometric") return PayoffKind::asian_geometric;
  throw ConfigError("payoff", "expected european_call, asian_arithmetic or asian_geometric, got '" + s + "'");
}

Method parse_method(const std::string& s) {
  for (Method m : {Method::mc, Method::antithetic, Method::stackmc, Method::geom_cv,
                   Method::stackmc_plus_geom_cv})
    if (to_string(m) == s) return m;
  throw ConfigError("methods", "unknown method '" + s + "'");
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::n_paths: return "n_paths";
    case SweepAxis::folds: return "folds";
    case SweepAxis::train_fraction: return "train_fraction";
    case SweepAxis::fit_order: return "fit_order";
  }
  return "?";
}

SweepAxis parse_axis(const std::string& s) {
  for (SweepAxis a : {SweepAxis::n_paths, SweepAxis::folds, SweepAxis::train_fraction, SweepAxis::fit_order})
    if (to_string(a) == s) return a;
  throw ConfigError("sweep.axis", "expected n_paths, folds, train_fraction or fit_order, got '" + s + "'");
}

void ExperimentConfig::validate() const {
  try {
    if (model == ModelKind::bs) bs.validate(); else heston.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(to_string(model), e.what());
  }
  if (model == ModelKind::bs && bs.sigma == 0.0 &&
      (contains(methods, Method::geom_cv) || contains(methods, Method::stackmc_plus_geom_cv)))
    throw ConfigError("bs.sigma", "geometric control variate needs sigma > 0");
  if (n_steps == 0) throw ConfigError("n_steps", "must be at least 1");
  if (model == ModelKind::bs && payoff == PayoffKind::european_call && n_steps != 1)
    throw ConfigError("n_steps", "a Black-Scholes european call is sampled with a single step");
  if (model == ModelKind::heston && payoff == PayoffKind::asian_geometric)
    throw ConfigError("payoff", "asian_geometric is only available under bs");
  if (spacing != "equal") throw ConfigError("spacing", "only 'equal' spacing is supported");
  const std::size_t min_paths =
      scheme.kind() == CrossValidationScheme::Kind::kfold ? 2 * std::size_t{scheme.folds()} : 4;
  if (n_paths < std::max<std::size_t>(min_paths, 4))
    throw ConfigError("n_paths", "at least " + std::to_string(std::max<std::size_t>(min_paths, 4)) +
                                     " paths required for " + scheme.to_string());
  if (contains(methods, Method::antithetic) && n_paths % 2 != 0)
    throw ConfigError("n_paths", "antithetic sampling needs an even path count");
  for (Method m : {Method::geom_cv, Method::stackmc_plus_geom_cv})
    if (contains(methods, m) && !(model == ModelKind::bs && payoff == PayoffKind::asian_arithmetic))
      throw ConfigError("methods", to_string(m) + " requires an asian_arithmetic payoff under bs");
  for (std::size_t i = 0; i < methods.size(); ++i)
    for (std::size_t j = i + 1; j < methods.size(); ++j)
      if (methods[i] == methods[j]) throw ConfigError("methods", "duplicate method " + to_string(methods[i]));
  if (runs == 0) throw ConfigError("runs", "must be at least 1");
  if (!seeds.empty() && seeds.size() != runs)
    throw ConfigError("seeds", "seed list length (" + std::to_string(seeds.size()) +
                                   ") differs from runs (" + std::to_string(runs) + ")");
}

std::vector<std::uint64_t> ExperimentConfig::resolved_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out(runs);
  for (unsigned i = 0; i < runs; ++i) out[i] = base_seed + i;
  return out;
}

double ExperimentConfig::maturity() const noexcept {
  return model == ModelKind::bs ? bs.maturity : heston.maturity;
}

double ExperimentConfig::discount() const noexcept {
  return model == ModelKind::bs ? bs.discount() : heston.discount();
}

RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed) {
  const double discount = cfg.discount();
  RunResult run;
  run.seed = seed;

  auto start = Clock::now();
  const Simulation sim = simulate(cfg, seed, false);
  const StackEstimate mc = plain_mc_estimate(sim.payoff, discount);
  const double mc_runtime = seconds_since(start);
  run.baseline = to_result(Method::mc, mc, mc_runtime);
  run.heston_clamp_rate = sim.clamp_rate;

  const std::uint64_t part_seed = derived_seed(seed, kPartitionTag);
  for (Method m : cfg.methods) {
    switch (m) {
      case Method::mc:
        run.results.push_back(run.baseline);
        break;
      case Method::antithetic: {
        start = Clock::now();
        const Simulation anti = simulate(cfg, derived_seed(seed, kAntitheticTag), true);
        const StackEstimate e = antithetic_mc_estimate(anti.payoff, discount);
        run.results.push_back(to_result(m, e, seconds_since(start)));
        break;
      }
      case Method::stackmc: {
        start = Clock::now();
        const StackEstimate e = stack_estimate(sim.payoff, sim.features, cfg.scheme, cfg.fit, discount, part_seed);
        run.results.push_back(to_result(m, e, seconds_since(start)));
        break;
      }
      case Method::geom_cv: {
        start = Clock::now();
        const auto sched = MonitoringSchedule::equally_spaced(cfg.n_steps, cfg.bs.maturity);
        const PayoffSamples geom = geometric_asian_payoff(cfg.bs, sched, sim.features);
        const StackEstimate e =
            geometric_cv_estimate(sim.payoff, geom, geometric_asian_closed_form(cfg.bs), discount);
        run.results.push_back(to_result(m, e, seconds_since(start)));
        break;
      }
      case Method::stackmc_plus_geom_cv: {
        start = Clock::now();
        const auto sched = MonitoringSchedule::equally_spaced(cfg.n_steps, cfg.bs.maturity);
        const PayoffSamples geom = geometric_asian_payoff(cfg.bs, sched, sim.features);
        const PayoffSamples diff{sim.payoff.values - geom.values, false};
        StackEstimate e = stack_estimate(diff, sim.features, cfg.scheme, cfg.fit, discount, part_seed);
        e.price += geometric_asian_closed_form(cfg.bs);
        run.results.push_back(to_result(m, e, seconds_since(start)));
        break;
      }
    }
  }
  return run;
}

std::vector<ReportRow> aggregate(const std::vector<Method>& methods,
                                 const std::vector<RunResult>& runs, double& mc_ci,
                                 double& mc_runtime) {
  const auto r = static_cast<double>(runs.size());
  mc_ci = 0.0;
  mc_runtime = 0.0;
  for (const auto& run : runs) {
    mc_ci += run.baseline.ci;
    mc_runtime += run.baseline.runtime_s;
  }
  mc_ci /= r;
  mc_runtime /= r;

  std::vector<ReportRow> rows;
  for (std::size_t k = 0; k < methods.size(); ++k) {
    ReportRow row;
    row.method = methods[k];
    for (const auto& run : runs) {
      const MethodResult& m = run.results.at(k);
      row.price += m.price;
      row.ci += m.ci;
      row.runtime_s += m.runtime_s;
      row.alpha += m.alpha;
      row.rho += m.rho;
      row.fallbacks += m.fell_back ? 1u : 0u;
    }
    row.price /= r;
    row.ci /= r;
    row.runtime_s /= r;
    row.alpha /= r;
    row.rho /= r;
    if (row.method == Method::mc) row.ci = mc_ci;
    row.abs_improvement = mc_ci - row.ci;
    row.improvement_ratio = mc_ci / row.ci;
    row.total_time = post_processes_mc(row.method) ? mc_runtime + row.runtime_s : row.runtime_s;
    row.equivalent_time = mc_runtime * row.improvement_ratio * row.improvement_ratio;
    row.time_units = row.runtime_s / mc_runtime;
    rows.push_back(row);
  }
  return rows;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport report;
  report.config = cfg;
  report.seeds = cfg.resolved_seeds();
  report.runs.resize(report.seeds.size());

  if (cfg.parallel && report.seeds.size() > 1) {
    unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(report.seeds.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = next++; i < report.seeds.size(); i = next++)
              report.runs[i] = run_single(cfg, report.seeds[i]);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  } else {
    for (std::size_t i = 0; i < report.seeds.size(); ++i)
      report.runs[i] = run_single(cfg, report.seeds[i]);
  }

  if (cfg.model == ModelKind::heston) {
    double clamp = 0.0;
    for (const auto& run : report.runs) clamp += run.heston_clamp_rate;
    std::clog << "heston: variance clamp rate " << clamp / static_cast<double>(report.runs.size())
              << " per step\n";
  }
  report.rows = aggregate(cfg.methods, report.runs, report.mc_ci, report.mc_runtime_s);
  return report;
}

ExperimentConfig apply_axis(const ExperimentConfig& base, SweepAxis axis, double value) {
  ExperimentConfig cfg = base;
  const auto as_count = [&](const char* field) {
    if (!(value >= 1.0) || value != std::floor(value))
      throw ConfigError(field, "sweep value must be a positive integer");
    return static_cast<std::size_t>(value);
  };
  switch (axis) {
    case SweepAxis::n_paths:
      cfg.n_paths = as_count("n_paths");
      break;
    case SweepAxis::folds:
      try {
        cfg.scheme = CrossValidationScheme::kfold(static_cast<unsigned>(as_count("folds")));
      } catch (const ConfigError&) {
        throw;
      } catch (const std::invalid_argument& e) {
        throw ConfigError("folds", e.what());
      }
      break;
    case SweepAxis::train_fraction:
      try {
        cfg.scheme = CrossValidationScheme::subsample(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("train_fraction", e.what());
      }
      break;
    case SweepAxis::fit_order:
      cfg.fit = FitSpec::poly(static_cast<unsigned>(as_count("fit_order")));
      break;
  }
  return cfg;
}

std::vector<SweepPoint> sweep(const ExperimentConfig& base, SweepAxis axis,
                              const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep.values", "axis value list is empty");
  std::vector<SweepPoint> out;
  for (double v : values) {
    const ExperimentConfig cfg = apply_axis(base, axis, v);
    out.push_back(SweepPoint{axis, v, run_experiment(cfg)});
  }
  return out;
}

}  // namespace stackmc
