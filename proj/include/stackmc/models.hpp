#pragma once

#include "stackmc/sampling.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace stackmc {

struct BSParams {
  double s0 = 100.0;
  double strike = 100.0;
  double r = 0.05;
  double sigma = 0.2;
  double maturity = 1.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  double discount() const noexcept;
};

/// Rates and variances are decimals (0.0319, not 3.19).
struct HestonParams {
  double s0 = 100.0;
  double strike = 100.0;
  double r = 0.0319;
  double maturity = 1.0;
  double v0 = 0.010201;
  double kappa = 6.21;
  double theta = 0.019;
  double xi = 0.61;
  double varrho = -0.7;

  void validate() const;
  double discount() const noexcept;
};

class MonitoringSchedule {
 public:
  /// Throws unless times are strictly increasing and positive.
  explicit MonitoringSchedule(std::vector<double> times);

  /// t_j = j * maturity / m for j = 1..m.
  static MonitoringSchedule equally_spaced(std::size_t m, double maturity);

  const std::vector<double>& times() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }
  double last() const noexcept { return times_.back(); }

 private:
  std::vector<double> times_;
};

/// Per-path payoffs, undiscounted unless `discounted` is set.
struct PayoffSamples {
  Eigen::VectorXd values;
  bool discounted = false;

  std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
};

PayoffSamples bs_terminal_payoff(const BSParams& p, const PathIncrements& x);

PayoffSamples bs_asian_payoff(const BSParams& p, const MonitoringSchedule& sched,
                              const PathIncrements& x);

/// Call on the discrete geometric mean of the monitored prices. Uses the same
/// path construction as bs_asian_payoff, so both can share increments.
PayoffSamples geometric_asian_payoff(const BSParams& p, const MonitoringSchedule& sched,
                                     const PathIncrements& x);

/// Monitored prices S_{t_1..t_M} built by running products of one-step
/// growth factors.
RowMatrix bs_asian_path(const BSParams& p, const MonitoringSchedule& sched,
                        const PathIncrements& x);

struct HestonPaths {
  Eigen::VectorXd terminal;  ///< S_T per path
  Eigen::VectorXd average;   ///< arithmetic mean of S over the M grid dates
  std::size_t clamp_events = 0;
  std::size_t variance_evaluations = 0;

  double clamp_rate() const noexcept {
    return variance_evaluations == 0 ? 0.0
                                     : static_cast<double>(clamp_events) / variance_evaluations;
  }
};

/// Full-truncation Euler for the variance, log-Euler for the stock. `pair.w`
/// drives the stock and `pair.b` the variance. Requires n_steps * dt == maturity.
HestonPaths heston_paths(const HestonParams& p, const CorrelatedPair& pair, double dt);

PayoffSamples call_payoff(const Eigen::VectorXd& underlying, double strike);

double bs_call_closed_form(const BSParams& p);
double bs_put_closed_form(const BSParams& p);

/// Call on the continuously monitored geometric average (Kemna-Vorst), from
/// log G_T ~ N(log s0 + (r - sigma^2/2) T/2, sigma^2 T/3). Discounted.
double geometric_asian_closed_form(const BSParams& p);

}  // namespace stackmc
