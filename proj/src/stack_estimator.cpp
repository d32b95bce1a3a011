#include "stackmc/stack_estimator.hpp"

#include "stackmc/analytic_integrals.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace stackmc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Unbiased draw from [0, bound).
std::uint64_t uniform_below(std::mt19937_64& eng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = eng();
    if (r >= threshold) return r % bound;
  }
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const Eigen::VectorXd& v) {
  MeanSd out;
  const auto n = static_cast<double>(v.size());
  out.mean = v.sum() / n;
  if (v.size() > 1) out.sd = std::sqrt((v.array() - out.mean).square().sum() / (n - 1.0));
  return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<std::size_t>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    out[static_cast<Eigen::Index>(r)] = v[static_cast<Eigen::Index>(rows[r])];
  return out;
}

RowMatrix gather(const RowMatrix& m, const std::vector<std::size_t>& rows) {
  RowMatrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

StackEstimate fallback(const PayoffSamples& f, double discount, const std::string& why,
                       Clock::time_point start) {
  StackEstimate e = plain_mc_estimate(f, discount);
  e.fell_back = true;
  e.note = why;
  e.runtime_s = seconds_since(start);
  return e;
}

StackEstimate finish(const Eigen::VectorXd& f_pooled, const Eigen::VectorXd& g_pooled,
                     double alpha, double rho, double undiscounted_price, double discount,
                     Clock::time_point start) {
  const Eigen::VectorXd residual = f_pooled - alpha * g_pooled;
  const MeanSd r = mean_sd(residual);
  StackEstimate e;
  e.price = discount * undiscounted_price;
  e.ci_halfwidth = discount * kConfidenceQuantile * r.sd / std::sqrt(static_cast<double>(residual.size()));
  e.alpha = alpha;
  e.rho = rho;
  e.n_samples = static_cast<std::size_t>(residual.size());
  e.runtime_s = seconds_since(start);
  return e;
}

}  // namespace

// --- CrossValidationScheme ---------------------------------------------------

CrossValidationScheme CrossValidationScheme::kfold(unsigned folds) {
  if (folds < 2) throw std::invalid_argument("k-fold cross-validation needs K >= 2");
  CrossValidationScheme s;
  s.kind_ = Kind::kfold;
  s.folds_ = folds;
  return s;
}

CrossValidationScheme CrossValidationScheme::subsample(double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("sub-sampling train fraction must lie in (0, 1)");
  CrossValidationScheme s;
  s.kind_ = Kind::subsample;
  s.folds_ = 2;
  s.train_fraction_ = train_fraction;
  return s;
}

CrossValidationScheme CrossValidationScheme::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
  const char* begin = tail.c_str();
  char* end = nullptr;
  if (head == "kfold") {
    if (colon == std::string::npos) return kfold(2);
    const unsigned long k = std::strtoul(begin, &end, 10);
    if (end != begin && *end == '\0' && tail.find('-') == std::string::npos)
      return kfold(static_cast<unsigned>(k));
  } else if (head == "subsample" && !tail.empty()) {
    const double frac = std::strtod(begin, &end);
    if (end != begin && *end == '\0') return subsample(frac);
  }
  throw std::invalid_argument("cross-validation scheme must be 'kfold:K' or 'subsample:F', got '" +
                              text + "'");
}

std::string CrossValidationScheme::to_string() const {
  if (kind_ == Kind::kfold) return "kfold:" + std::to_string(folds_);
  char buf[40];
  std::snprintf(buf, sizeof buf, "subsample:%.17g", train_fraction_);
  return buf;
}

// --- FoldPartition -------------------------------------------------------------

FoldPartition::FoldPartition(std::size_t n, CrossValidationScheme scheme,
                             std::vector<std::vector<std::size_t>> members)
    : scheme_(scheme), members_(std::move(members)) {
  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  assignment_.assign(n, kUnset);
  for (std::size_t g = 0; g < members_.size(); ++g) {
    if (members_[g].empty()) throw std::invalid_argument("FoldPartition: empty group");
    for (std::size_t row : members_[g]) {
      if (row >= n || assignment_[row] != kUnset)
        throw std::invalid_argument("FoldPartition: groups must be disjoint row indices below n");
      assignment_[row] = static_cast<std::uint32_t>(g);
    }
  }
  for (auto a : assignment_)
    if (a == kUnset) throw std::invalid_argument("FoldPartition: groups must cover every row");
}

std::vector<std::size_t> FoldPartition::fold_sizes() const {
  std::vector<std::size_t> sizes;
  for (const auto& m : members_) sizes.push_back(m.size());
  return sizes;
}

FoldPartition FoldPartition::remapped(const std::vector<std::size_t>& new_index) const {
  if (new_index.size() != n()) throw std::invalid_argument("FoldPartition::remapped: size mismatch");
  auto members = members_;
  for (auto& group : members)
    for (auto& row : group) row = new_index[row];
  return FoldPartition(n(), scheme_, std::move(members));
}

FoldPartition partition(std::size_t n, const CrossValidationScheme& scheme, std::uint64_t seed) {
  if (scheme.kind() == CrossValidationScheme::Kind::kfold) {
    if (n < 2 * static_cast<std::size_t>(scheme.folds()))
      throw std::invalid_argument("partition: k-fold needs at least 2K samples");
  } else if (n < 2) {
    throw std::invalid_argument("partition: sub-sampling needs at least 2 samples");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 eng(seed);
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[uniform_below(eng, i + 1)]);

  std::vector<std::vector<std::size_t>> members;
  if (scheme.kind() == CrossValidationScheme::Kind::kfold) {
    const std::size_t k = scheme.folds();
    for (std::size_t f = 0; f < k; ++f) {
      const std::size_t lo = f * n / k;
      const std::size_t hi = (f + 1) * n / k;
      members.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(lo),
                           perm.begin() + static_cast<std::ptrdiff_t>(hi));
    }
  } else {
    auto n_train = static_cast<std::size_t>(std::llround(scheme.train_fraction() * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    members.emplace_back(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    members.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  }
  return FoldPartition(n, scheme, std::move(members));
}

// --- FitSpec -------------------------------------------------------------------

FitSpec FitSpec::parse(const std::string& text) {
  if (text == "pwlinear" || text == "piecewise_linear") return pwlinear();
  if (text.rfind("poly:", 0) == 0) {
    const std::string tail = text.substr(5);
    if (!tail.empty() && tail.find_first_not_of("0123456789") == std::string::npos)
      return poly(static_cast<unsigned>(std::stoul(tail)));
  }
  throw std::invalid_argument("fit must be 'poly:L' or 'pwlinear', got '" + text + "'");
}

std::string FitSpec::to_string() const {
  return kind == FitKind::piecewise_linear ? "pwlinear" : "poly:" + std::to_string(degree);
}

FitModel FitSpec::fit(const TrainingSet& train) const {
  return kind == FitKind::piecewise_linear ? fit_piecewise_linear(train, options)
                                           : fit_polynomial(train, degree, options);
}

// --- estimators ----------------------------------------------------------------

ControlVariateStats estimate_alpha(const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  if (f.size() != g.size()) throw std::invalid_argument("estimate_alpha: length mismatch");
  if (f.size() < 2) throw std::invalid_argument("estimate_alpha: need at least two samples");
  ControlVariateStats s;
  s.n = static_cast<std::size_t>(f.size());
  const double denom = static_cast<double>(f.size()) - 1.0;
  s.mu_f = f.mean();
  s.mu_g = g.mean();
  const Eigen::ArrayXd df = f.array() - s.mu_f;
  const Eigen::ArrayXd dg = g.array() - s.mu_g;
  s.var_f = df.square().sum() / denom;
  s.var_g = dg.square().sum() / denom;
  s.cov_fg = (df * dg).sum() / denom;
  // Variance at rounding level of the values counts as zero.
  constexpr double kTiny = 64.0 * std::numeric_limits<double>::epsilon();
  const double g_scale = g.squaredNorm() / static_cast<double>(g.size());
  const double f_scale = f.squaredNorm() / static_cast<double>(f.size());
  if (s.var_g <= kTiny * kTiny * g_scale || s.var_f <= kTiny * kTiny * f_scale) {
    s.rho = 0.0;
    s.alpha = 0.0;
    return s;
  }
  s.rho = s.cov_fg / std::sqrt(s.var_f * s.var_g);
  s.alpha = s.cov_fg / s.var_g;
  return s;
}

StackEstimate stack_estimate(const PayoffSamples& f, const PathIncrements& features,
                             const FoldPartition& part, const FitSpec& fit, double discount) {
  const auto start = Clock::now();
  if (f.size() != features.n_paths())
    throw std::invalid_argument("stack_estimate: payoff count differs from feature rows");
  if (part.n() != f.size())
    throw std::invalid_argument("stack_estimate: partition size differs from payoff count");
  const RowMatrix& x = features.data();

  if (part.scheme().kind() == CrossValidationScheme::Kind::subsample) {
    const auto& train_rows = part.members(0);
    const auto& test_rows = part.members(1);
    std::vector<std::size_t> all_rows(train_rows);
    all_rows.insert(all_rows.end(), test_rows.begin(), test_rows.end());
    FitModel g;
    try {
      g = fit.fit(TrainingSet{gather(x, train_rows), gather(f.values, train_rows)});
    } catch (const FitRefused& e) {
      return fallback(f, discount, e.what(), start);
    }
    const double g_hat = expectation(g);
    const Eigen::VectorXd f_all = gather(f.values, all_rows);
    const Eigen::VectorXd g_all = g.evaluate_rows(gather(x, all_rows));
    const auto n_test = static_cast<Eigen::Index>(test_rows.size());
    if (n_test < 2) return fallback(f, discount, "sub-sampling test split below two rows", start);
    const ControlVariateStats st = estimate_alpha(f_all.tail(n_test), g_all.tail(n_test));
    const double price = st.alpha * g_hat + (f_all - st.alpha * g_all).mean();
    return finish(f_all, g_all, st.alpha, st.rho, price, discount, start);
  }

  const std::size_t k = part.groups();
  std::vector<double> g_hat(k);
  std::vector<Eigen::VectorXd> g_test(k);
  std::vector<Eigen::VectorXd> f_test(k);
  for (std::size_t fold = 0; fold < k; ++fold) {
    std::vector<std::size_t> train_rows;
    train_rows.reserve(part.n() - part.members(fold).size());
    for (std::size_t other = 0; other < k; ++other)
      if (other != fold)
        train_rows.insert(train_rows.end(), part.members(other).begin(), part.members(other).end());
    FitModel g;
    try {
      g = fit.fit(TrainingSet{gather(x, train_rows), gather(f.values, train_rows)});
    } catch (const FitRefused& e) {
      return fallback(f, discount, e.what(), start);
    }
    g_hat[fold] = expectation(g);
    g_test[fold] = g.evaluate_rows(gather(x, part.members(fold)));
    f_test[fold] = gather(f.values, part.members(fold));
  }

  Eigen::VectorXd f_pooled(static_cast<Eigen::Index>(part.n()));
  Eigen::VectorXd g_pooled(static_cast<Eigen::Index>(part.n()));
  Eigen::Index offset = 0;
  for (std::size_t fold = 0; fold < k; ++fold) {
    f_pooled.segment(offset, f_test[fold].size()) = f_test[fold];
    g_pooled.segment(offset, g_test[fold].size()) = g_test[fold];
    offset += f_test[fold].size();
  }
  const ControlVariateStats st = estimate_alpha(f_pooled, g_pooled);

  double price = 0.0;
  for (std::size_t fold = 0; fold < k; ++fold)
    price += st.alpha * g_hat[fold] + (f_test[fold] - st.alpha * g_test[fold]).mean();
  price /= static_cast<double>(k);
  return finish(f_pooled, g_pooled, st.alpha, st.rho, price, discount, start);
}

StackEstimate stack_estimate(const PayoffSamples& f, const PathIncrements& features,
                             const CrossValidationScheme& scheme, const FitSpec& fit,
                             double discount, std::uint64_t partition_seed) {
  return stack_estimate(f, features, partition(f.size(), scheme, partition_seed), fit, discount);
}

StackEstimate plain_mc_estimate(const PayoffSamples& f, double discount) {
  const auto start = Clock::now();
  if (f.size() == 0) throw std::invalid_argument("plain_mc_estimate: no samples");
  const MeanSd m = mean_sd(f.values);
  StackEstimate e;
  e.price = discount * m.mean;
  e.ci_halfwidth = discount * kConfidenceQuantile * m.sd / std::sqrt(static_cast<double>(f.size()));
  e.n_samples = f.size();
  e.runtime_s = seconds_since(start);
  return e;
}

StackEstimate antithetic_mc_estimate(const PayoffSamples& f, double discount) {
  const auto start = Clock::now();
  if (f.size() < 4 || f.size() % 2 != 0)
    throw std::invalid_argument("antithetic_mc_estimate: need an even count of at least 4 samples");
  const auto half = static_cast<Eigen::Index>(f.size() / 2);
  const Eigen::VectorXd pairs = 0.5 * (f.values.head(half) + f.values.tail(half));
  StackEstimate e = plain_mc_estimate(PayoffSamples{pairs, f.discounted}, discount);
  e.n_samples = f.size();
  e.runtime_s = seconds_since(start);
  return e;
}

StackEstimate geometric_cv_estimate(const PayoffSamples& arith, const PayoffSamples& geom,
                                    double c_g_closed, double discount) {
  const auto start = Clock::now();
  if (arith.size() != geom.size())
    throw std::invalid_argument("geometric_cv_estimate: payoff vectors differ in length");
  if (arith.size() < 2) throw std::invalid_argument("geometric_cv_estimate: need two samples");
  const Eigen::VectorXd diff = arith.values - geom.values;
  const MeanSd d = mean_sd(diff);
  StackEstimate e;
  e.price = discount * d.mean + c_g_closed;
  e.ci_halfwidth = discount * kConfidenceQuantile * d.sd / std::sqrt(static_cast<double>(diff.size()));
  e.alpha = 1.0;
  const ControlVariateStats st = estimate_alpha(arith.values, geom.values);
  e.rho = st.rho;
  e.n_samples = arith.size();
  e.runtime_s = seconds_since(start);
  return e;
}

}  // namespace stackmc
