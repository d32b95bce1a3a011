#include "stackmc/models.hpp"

#include "stackmc/normal_dist.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stackmc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_steps(const PathIncrements& x, std::size_t m, const char* who) {
  if (x.n_steps() != m)
    throw std::invalid_argument(std::string(who) + ": increment columns (" +
                                std::to_string(x.n_steps()) + ") != schedule length (" +
                                std::to_string(m) + ")");
}

}  // namespace

void BSParams::validate() const {
  require(s0 > 0.0, "s0 must be positive");
  require(strike > 0.0, "strike must be positive");
  require(sigma >= 0.0, "sigma must be non-negative");
  require(maturity > 0.0, "maturity must be positive");
  require(std::isfinite(r), "r must be finite");
}

double BSParams::discount() const noexcept { return std::exp(-r * maturity); }

void HestonParams::validate() const {
  require(s0 > 0.0, "s0 must be positive");
  require(strike > 0.0, "strike must be positive");
  require(maturity > 0.0, "maturity must be positive");
  require(v0 > 0.0, "v0 must be positive");
  require(kappa > 0.0, "kappa must be positive");
  require(theta > 0.0, "theta must be positive");
  require(xi > 0.0, "xi must be positive");
  require(std::abs(varrho) <= 1.0, "varrho must lie in [-1, 1]");
  require(std::isfinite(r), "r must be finite");
}

double HestonParams::discount() const noexcept { return std::exp(-r * maturity); }

MonitoringSchedule::MonitoringSchedule(std::vector<double> times) : times_(std::move(times)) {
  require(!times_.empty(), "monitoring schedule must be nonempty");
  require(times_.front() > 0.0, "first monitoring date must be positive");
  for (std::size_t j = 1; j < times_.size(); ++j)
    require(times_[j] > times_[j - 1], "monitoring dates must be strictly increasing");
}

MonitoringSchedule MonitoringSchedule::equally_spaced(std::size_t m, double maturity) {
  require(m > 0, "schedule length must be positive");
  std::vector<double> t(m);
  for (std::size_t j = 0; j < m; ++j) t[j] = maturity * static_cast<double>(j + 1) / m;
  t.back() = maturity;
  return MonitoringSchedule(std::move(t));
}

PayoffSamples call_payoff(const Eigen::VectorXd& underlying, double strike) {
  return PayoffSamples{(underlying.array() - strike).cwiseMax(0.0).matrix(), false};
}

PayoffSamples bs_terminal_payoff(const BSParams& p, const PathIncrements& x) {
  if (x.n_steps() != 1)
    throw std::invalid_argument("bs_terminal_payoff: expected a single column of increments");
  const double drift = (p.r - 0.5 * p.sigma * p.sigma) * p.maturity;
  const double vol = p.sigma * std::sqrt(p.maturity);
  Eigen::VectorXd st = (p.s0 * (drift + vol * x.data().col(0).array()).exp()).matrix();
  return call_payoff(st, p.strike);
}

namespace {

struct StepCoefficients {
  std::vector<double> drift;
  std::vector<double> vol;
};

StepCoefficients step_coefficients(const BSParams& p, const MonitoringSchedule& sched) {
  const std::size_t m = sched.size();
  StepCoefficients c{std::vector<double>(m), std::vector<double>(m)};
  double prev = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double dt = sched.times()[j] - prev;
    c.drift[j] = (p.r - 0.5 * p.sigma * p.sigma) * dt;
    c.vol[j] = p.sigma * std::sqrt(dt);
    prev = sched.times()[j];
  }
  return c;
}

// Calls visit(i, j, S_{t_j}) in row order; S is a running product of growth factors.
template <class Visit>
void walk_paths(const BSParams& p, const MonitoringSchedule& sched, const PathIncrements& x,
                Visit&& visit) {
  const StepCoefficients c = step_coefficients(p, sched);
  const std::size_t m = sched.size();
  for (std::size_t i = 0; i < x.n_paths(); ++i) {
    double level = p.s0;
    for (std::size_t j = 0; j < m; ++j) {
      level *= std::exp(c.drift[j] + c.vol[j] * x(i, j));
      visit(i, j, level);
    }
  }
}

}  // namespace

RowMatrix bs_asian_path(const BSParams& p, const MonitoringSchedule& sched,
                        const PathIncrements& x) {
  require_steps(x, sched.size(), "bs_asian_path");
  RowMatrix s(x.n_paths(), sched.size());
  walk_paths(p, sched, x, [&](std::size_t i, std::size_t j, double level) { s(i, j) = level; });
  return s;
}

PayoffSamples bs_asian_payoff(const BSParams& p, const MonitoringSchedule& sched,
                              const PathIncrements& x) {
  require_steps(x, sched.size(), "bs_asian_payoff");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.n_paths());
  walk_paths(p, sched, x, [&](std::size_t i, std::size_t, double level) { sum[i] += level; });
  return call_payoff(sum / static_cast<double>(sched.size()), p.strike);
}

PayoffSamples geometric_asian_payoff(const BSParams& p, const MonitoringSchedule& sched,
                                     const PathIncrements& x) {
  require_steps(x, sched.size(), "geometric_asian_payoff");
  Eigen::VectorXd log_sum = Eigen::VectorXd::Zero(x.n_paths());
  walk_paths(p, sched, x,
             [&](std::size_t i, std::size_t, double level) { log_sum[i] += std::log(level); });
  Eigen::VectorXd g = (log_sum / static_cast<double>(sched.size())).array().exp().matrix();
  return call_payoff(g, p.strike);
}

HestonPaths heston_paths(const HestonParams& p, const CorrelatedPair& pair, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("heston_paths: dt must be positive");
  const std::size_t n = pair.w.n_paths();
  const std::size_t m = pair.w.n_steps();
  if (pair.b.n_paths() != n || pair.b.n_steps() != m)
    throw std::invalid_argument("heston_paths: w and b dimensions differ");
  if (std::abs(static_cast<double>(m) * dt - p.maturity) > 1e-9 * p.maturity)
    throw std::invalid_argument("heston_paths: n_steps * dt must equal maturity");

  const double sqdt = std::sqrt(dt);
  const double log_s0 = std::log(p.s0);
  HestonPaths out;
  out.terminal.resize(n);
  out.average.resize(n);
  out.variance_evaluations = n * m;
  for (std::size_t i = 0; i < n; ++i) {
    double log_s = log_s0;
    double v = p.v0;
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (v < 0.0) ++out.clamp_events;
      const double vp = std::max(v, 0.0);
      const double sv = std::sqrt(vp) * sqdt;
      log_s += (p.r - 0.5 * vp) * dt + sv * pair.w(i, j);
      v += p.kappa * (p.theta - vp) * dt + p.xi * sv * pair.b(i, j);
      sum += std::exp(log_s);
    }
    out.terminal[i] = std::exp(log_s);
    out.average[i] = sum / static_cast<double>(m);
  }
  return out;
}

double bs_call_closed_form(const BSParams& p) {
  p.validate();
  if (!(p.sigma > 0.0)) throw std::invalid_argument("bs_call_closed_form: sigma must be positive");
  const double sd = p.sigma * std::sqrt(p.maturity);
  const double d1 = (std::log(p.s0 / p.strike) + (p.r + 0.5 * p.sigma * p.sigma) * p.maturity) / sd;
  const double d2 = d1 - sd;
  return p.s0 * norm_cdf(d1) - p.strike * p.discount() * norm_cdf(d2);
}

double bs_put_closed_form(const BSParams& p) {
  p.validate();
  if (!(p.sigma > 0.0)) throw std::invalid_argument("bs_put_closed_form: sigma must be positive");
  const double sd = p.sigma * std::sqrt(p.maturity);
  const double d1 = (std::log(p.s0 / p.strike) + (p.r + 0.5 * p.sigma * p.sigma) * p.maturity) / sd;
  const double d2 = d1 - sd;
  return p.strike * p.discount() * norm_cdf(-d2) - p.s0 * norm_cdf(-d1);
}

double geometric_asian_closed_form(const BSParams& p) {
  p.validate();
  if (!(p.sigma > 0.0))
    throw std::invalid_argument("geometric_asian_closed_form: sigma must be positive");
  const double mean = std::log(p.s0) + 0.5 * (p.r - 0.5 * p.sigma * p.sigma) * p.maturity;
  const double var = p.sigma * p.sigma * p.maturity / 3.0;
  const double sd = std::sqrt(var);
  const double d2 = (mean - std::log(p.strike)) / sd;
  const double d1 = d2 + sd;
  return p.discount() * (std::exp(mean + 0.5 * var) * norm_cdf(d1) - p.strike * norm_cdf(d2));
}

}  // namespace stackmc
