#include "stackmc/analytic_integrals.hpp"

#include "stackmc/normal_dist.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace stackmc {

namespace {

double normal_norm(const TruncationHyperplane& h) {
  const double norm = h.a.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("truncation hyperplane has a zero normal vector");
  return norm;
}

}  // namespace

double gaussian_moment(unsigned n, double sigma) {
  if (n % 2 == 1) return 0.0;
  // n! / (2^{n/2} (n/2)!) = (n-1)!!
  double m = 1.0;
  for (unsigned k = n; k > 1; k -= 2) m *= static_cast<double>(k - 1);
  return m * std::pow(sigma, static_cast<double>(n));
}

double polynomial_expectation(const FitModel& model) {
  if (model.kind() != FitKind::polynomial)
    throw std::invalid_argument("polynomial_expectation: model is not polynomial");
  const MonomialBasis& basis = *model.basis();
  std::vector<double> moments(basis.degree() + 1);
  for (unsigned e = 0; e <= basis.degree(); ++e) moments[e] = gaussian_moment(e);
  double total = 0.0;
  for (std::size_t m = 0; m < basis.size(); ++m) {
    double term = model.coefficients()[static_cast<Eigen::Index>(m)];
    for (std::size_t j = 0; j < basis.dim() && term != 0.0; ++j)
      term *= moments[basis.exponent(m, j)];
    total += term;
  }
  return total;
}

double truncated_mass(const TruncationHyperplane& h) {
  return 1.0 - norm_cdf(-h.a0 / normal_norm(h));
}

double truncated_first_moment(const TruncationHyperplane& h, std::size_t j) {
  if (j >= static_cast<std::size_t>(h.a.size()))
    throw std::out_of_range("truncated_first_moment: coordinate index out of range");
  const double norm = normal_norm(h);
  const double z = h.a0 / norm;
  return h.a[static_cast<Eigen::Index>(j)] / norm * kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double piecewise_linear_expectation(const FitModel& model) {
  if (model.kind() != FitKind::piecewise_linear || !model.hyperplane())
    throw std::invalid_argument("piecewise_linear_expectation: model has no truncation hyperplane");
  const TruncationHyperplane& h = *model.hyperplane();
  const Eigen::VectorXd& c = model.coefficients();
  if (h.a.norm() == 0.0) return h.a0 >= 0.0 ? c[0] : 0.0;
  // sum_j c_j * first_moment_j, with the shared factor pulled out.
  const double norm = h.a.norm();
  const double z = h.a0 / norm;
  const double slope = c.tail(model.dim()).dot(h.a) / norm * kInvSqrt2Pi * std::exp(-0.5 * z * z);
  return c[0] * truncated_mass(h) + slope;
}

double expectation(const FitModel& model) {
  return model.kind() == FitKind::polynomial ? polynomial_expectation(model)
                                             : piecewise_linear_expectation(model);
}

}  // namespace stackmc
