#pragma once

// Reference computations that share no code with the library: a separate
// normal generator (Box-Muller on std::mt19937_64), adaptive Simpson
// quadrature and plain sample statistics.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

class BoxMuller {
 public:
  explicit BoxMuller(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = unif_(eng_);
    const double u2 = unif_(eng_);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    spare_ = rad * std::sin(2.0 * std::numbers::pi * u2);
    have_spare_ = true;
    return rad * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 eng_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                           double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 50);
}

inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

/// E[h(Z)], Z ~ N(0,1), by quadrature over [-12, 12] split at the given knots.
inline double gauss_expect(const std::function<double(double)>& h, std::vector<double> knots = {},
                           double tol = 1e-13) {
  knots.insert(knots.begin(), -12.0);
  knots.push_back(12.0);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k)
    total += integrate([&](double x) { return h(x) * phi(x); }, knots[k], knots[k + 1], tol);
  return total;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  std::size_t n = 0;
  double se() const { return std::sqrt(var / static_cast<double>(n)); }
};

template <class Range>
Moments moments(const Range& xs) {
  Moments m;
  for (double x : xs) {
    ++m.n;
    m.mean += x;
  }
  m.mean /= static_cast<double>(m.n);
  for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(m.n - 1);
  return m;
}

template <class A, class B>
double correlation(const A& a, const B& b) {
  const auto n = static_cast<std::size_t>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

/// Black-Scholes call price with the normal CDF taken from std::erfc.
inline double bs_call(double s0, double k, double r, double sigma, double t) {
  auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  const double sd = sigma * std::sqrt(t);
  const double d1 = (std::log(s0 / k) + (r + 0.5 * sigma * sigma) * t) / sd;
  return s0 * cdf(d1) - k * std::exp(-r * t) * cdf(d1 - sd);
}

/// Call on the discrete geometric mean of S at t_j = jT/M (lognormal exact).
inline double discrete_geometric_call(double s0, double k, double r, double sigma, double t,
                                      std::size_t m) {
  const double dm = static_cast<double>(m);
  const double mean_t = t * (dm + 1.0) / (2.0 * dm);
  const double var = sigma * sigma * t * (dm + 1.0) * (2.0 * dm + 1.0) / (6.0 * dm * dm);
  const double mu = std::log(s0) + (r - 0.5 * sigma * sigma) * mean_t;
  auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  const double sd = std::sqrt(var);
  const double d1 = (mu - std::log(k) + var) / sd;
  return std::exp(-r * t) * (std::exp(mu + 0.5 * var) * cdf(d1) - k * cdf(d1 - sd));
}

}  // namespace oracle
