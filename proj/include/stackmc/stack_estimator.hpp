#pragma once

#include "stackmc/fitters.hpp"
#include "stackmc/models.hpp"
#include "stackmc/sampling.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace stackmc {

/// 95% two-sided Gaussian quantile used for every reported half-width.
inline constexpr double kConfidenceQuantile = 1.96;

class CrossValidationScheme {
 public:
  enum class Kind { kfold, subsample };

  static CrossValidationScheme kfold(unsigned folds);
  static CrossValidationScheme subsample(double train_fraction);
  /// "kfold:K" or "subsample:F".
  static CrossValidationScheme parse(const std::string& text);

  Kind kind() const noexcept { return kind_; }
  unsigned folds() const noexcept { return folds_; }
  double train_fraction() const noexcept { return train_fraction_; }
  std::string to_string() const;

  friend bool operator==(const CrossValidationScheme&, const CrossValidationScheme&) = default;

 private:
  Kind kind_ = Kind::kfold;
  unsigned folds_ = 2;
  double train_fraction_ = 0.5;
};

/// Disjoint, exhaustive groups of row indices. For k-fold, groups are the
/// folds; for sub-sampling, group 0 is the training split and group 1 the
/// test split. Member order is the order rows are gathered in, which makes
/// every downstream reduction independent of the physical row order.
class FoldPartition {
 public:
  FoldPartition(std::size_t n, CrossValidationScheme scheme,
                std::vector<std::vector<std::size_t>> members);

  const CrossValidationScheme& scheme() const noexcept { return scheme_; }
  std::size_t n() const noexcept { return assignment_.size(); }
  std::size_t groups() const noexcept { return members_.size(); }
  const std::vector<std::size_t>& members(std::size_t group) const { return members_.at(group); }
  /// Group index of each row.
  const std::vector<std::uint32_t>& assignment() const noexcept { return assignment_; }
  std::vector<std::size_t> fold_sizes() const;

  /// Same grouping after rows move: row i of the old layout is new_index[i].
  FoldPartition remapped(const std::vector<std::size_t>& new_index) const;

 private:
  CrossValidationScheme scheme_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::uint32_t> assignment_;
};

/// Seeded random partition. k-fold needs n >= 2K and gives sizes differing
/// by at most one; sub-sampling puts round(fraction * n) rows in training.
FoldPartition partition(std::size_t n, const CrossValidationScheme& scheme, std::uint64_t seed);

struct FitSpec {
  FitKind kind = FitKind::polynomial;
  unsigned degree = 4;
  FitOptions options{};

  static FitSpec poly(unsigned degree) { return FitSpec{FitKind::polynomial, degree, {}}; }
  static FitSpec pwlinear() { return FitSpec{FitKind::piecewise_linear, 1, {}}; }
  /// "poly:L" or "pwlinear".
  static FitSpec parse(const std::string& text);
  std::string to_string() const;

  FitModel fit(const TrainingSet& train) const;
};

struct ControlVariateStats {
  double mu_f = 0.0;
  double mu_g = 0.0;
  double var_f = 0.0;
  double var_g = 0.0;
  double cov_fg = 0.0;
  double rho = 0.0;
  double alpha = 0.0;
  std::size_t n = 0;
};

/// Unbiased (n-1) moments and alpha = cov/var_g = (sigma_f/sigma_g) rho.
/// A vanishing var_g or var_f yields rho = alpha = 0.
ControlVariateStats estimate_alpha(const Eigen::VectorXd& f, const Eigen::VectorXd& g);

struct StackEstimate {
  double price = 0.0;
  double ci_halfwidth = 0.0;
  double alpha = 0.0;
  double rho = 0.0;
  std::size_t n_samples = 0;
  double runtime_s = 0.0;
  /// Set when a fit was refused and the plain MC estimate was returned.
  bool fell_back = false;
  std::string note;
};

/// Stacked Monte Carlo over a given partition. Each fold's control variate
/// is fitted on the other folds, integrated in closed form and evaluated on
/// the fold. One alpha is estimated from all out-of-sample pairs; fold
/// estimates alpha*ghat_k + mean_k(f - alpha g_k) are averaged and then
/// discounted. The half-width is 1.96 sd(f - alpha g)/sqrt(N), discounted.
///
/// With a sub-sampling partition the single model is fitted on the training
/// split, alpha comes from the test split, and the estimate runs over all N.
StackEstimate stack_estimate(const PayoffSamples& f, const PathIncrements& features,
                             const FoldPartition& part, const FitSpec& fit, double discount);

StackEstimate stack_estimate(const PayoffSamples& f, const PathIncrements& features,
                             const CrossValidationScheme& scheme, const FitSpec& fit,
                             double discount, std::uint64_t partition_seed);

StackEstimate plain_mc_estimate(const PayoffSamples& f, double discount);

/// f holds N originals followed by their N antithetic partners; the
/// estimate uses the N pair averages.
StackEstimate antithetic_mc_estimate(const PayoffSamples& f, double discount);

/// (C_A - C_G) by Monte Carlo plus the closed-form (already discounted)
/// geometric price.
StackEstimate geometric_cv_estimate(const PayoffSamples& arith, const PayoffSamples& geom,
                                    double c_g_closed, double discount);

}  // namespace stackmc
