#pragma once

#include "stackmc/hyperplane.hpp"
#include "stackmc/sampling.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stackmc {

/// Raised when a training set cannot support the requested model. Callers
/// fall back to plain Monte Carlo.
class FitRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Number of multi-indices of total degree <= degree in `dim` variables,
/// i.e. C(dim + degree, degree). Saturates at SIZE_MAX.
std::size_t monomial_count(std::size_t dim, unsigned degree);

/// Monomials x^alpha with |alpha| <= degree in graded lexicographic order:
/// by total degree, then lexicographically descending in the exponent
/// vector. For dim = 2, degree = 2 the order is
///   1, x1, x2, x1^2, x1 x2, x2^2.
/// Every monomial other than 1 is parent(m) * x[var(m)], where the parent
/// strips one power of the first variable with a nonzero exponent and always
/// precedes m.
class MonomialBasis {
 public:
  MonomialBasis(std::size_t dim, unsigned degree);

  std::size_t dim() const noexcept { return dim_; }
  unsigned degree() const noexcept { return degree_; }
  std::size_t size() const noexcept { return parent_.size(); }

  /// Exponent of variable j in monomial m.
  unsigned exponent(std::size_t m, std::size_t j) const { return exponents_[m * dim_ + j]; }
  std::size_t parent(std::size_t m) const { return parent_[m]; }
  std::size_t var(std::size_t m) const { return var_[m]; }

  /// out[m] = x^alpha_m; out must have size() entries.
  void evaluate(const double* x, double* out) const;

 private:
  std::size_t dim_;
  unsigned degree_;
  std::vector<std::uint8_t> exponents_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> var_;
};

enum class FitKind { polynomial, piecewise_linear };

/// A fitted control variate g. Immutable.
///
/// polynomial:       g(x) = sum_m c_m x^alpha_m over the MonomialBasis order.
/// piecewise_linear: g(x) = c_0 + c.x where a.x + a0 >= 0, else 0. Fitted
///                   models use the affine part itself as the plane
///                   (a0 = c_0, a = c_1..c_M), so g = max(c_0 + c.x, 0).
class FitModel {
 public:
  static FitModel polynomial(std::size_t dim, unsigned degree, Eigen::VectorXd coefficients);
  static FitModel piecewise_linear(Eigen::VectorXd coefficients);
  /// Affine part c_0 + c.x kept on an arbitrary half-space, 0 elsewhere.
  static FitModel piecewise_linear(Eigen::VectorXd coefficients, TruncationHyperplane plane);

  FitKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  unsigned degree() const noexcept { return degree_; }
  const Eigen::VectorXd& coefficients() const noexcept { return coefficients_; }
  const std::optional<TruncationHyperplane>& hyperplane() const noexcept { return hyperplane_; }
  /// Set for polynomial models only.
  const std::shared_ptr<const MonomialBasis>& basis() const noexcept { return basis_; }

  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// g evaluated on every row of x.
  Eigen::VectorXd evaluate_rows(const RowMatrix& x) const;

  /// Plain-text record: kind, dimension, degree and coefficients printed
  /// with 17 significant digits, plus an explicit hyperplane line when one was given.
  std::string to_text() const;
  static FitModel from_text(const std::string& text);

 private:
  FitKind kind_ = FitKind::polynomial;
  std::size_t dim_ = 0;
  unsigned degree_ = 0;
  Eigen::VectorXd coefficients_;
  std::optional<TruncationHyperplane> hyperplane_;
  bool self_truncated_ = true;
  std::shared_ptr<const MonomialBasis> basis_;
};

struct TrainingSet {
  RowMatrix features;
  Eigen::VectorXd targets;
};

struct FitOptions {
  /// Added to the diagonal of the normal equations; 0 is plain least squares.
  double ridge = 0.0;
};

/// Bases above this size trigger a warning on stderr.
inline constexpr std::size_t kLargeBasisWarning = 100000;

/// Least-squares polynomial of total degree <= degree. Requires more rows
/// than coefficients (FitRefused otherwise). Rank-deficient designs resolve
/// to the minimum-norm solution.
FitModel fit_polynomial(const TrainingSet& train, unsigned degree, FitOptions opts = {});

/// Filter-and-fit: affine least squares on the rows with targets > 0, then
/// truncated at zero on the negative side of the fitted plane. Requires at
/// least dim + 2 positive targets.
FitModel fit_piecewise_linear(const TrainingSet& train, FitOptions opts = {});

/// Minimum-norm least-squares coefficients for design rows built from the
/// basis. Exposed for tests.
Eigen::VectorXd least_squares(const RowMatrix& features, const Eigen::VectorXd& targets,
                              const MonomialBasis& basis, FitOptions opts = {});

}  // namespace stackmc
