#pragma once

#include "stackmc/fitters.hpp"
#include "stackmc/hyperplane.hpp"

#include <cstddef>

namespace stackmc {

// Closed-form expectations against the standard multivariate normal
// density (independent N(0,1) coordinates).

/// E[X^n] for X ~ N(0, sigma^2): 0 for odd n, (n-1)!! sigma^n for even n.
double gaussian_moment(unsigned n, double sigma = 1.0);

/// sum_alpha c_alpha prod_j E[X_j^alpha_j].
double polynomial_expectation(const FitModel& model);

/// P(a.X + a0 >= 0) = 1 - N(-a0/|a|). Throws if |a| = 0.
double truncated_mass(const TruncationHyperplane& h);

/// E[X_j 1{a.X + a0 >= 0}] = a_j / (|a| sqrt(2 pi)) exp(-a0^2 / (2|a|^2)).
/// j is zero-based.
double truncated_first_moment(const TruncationHyperplane& h, std::size_t j);

/// c_0 * mass + sum_j c_j * first_moment_j over the model's own hyperplane.
/// A plane with a = 0 keeps everything (a0 >= 0) or nothing.
double piecewise_linear_expectation(const FitModel& model);

/// Dispatches on the model kind.
double expectation(const FitModel& model);

}  // namespace stackmc
