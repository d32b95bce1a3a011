#include "doctest.h"
#include "oracles.hpp"

#include "stackmc/fitters.hpp"
#include "stackmc/models.hpp"
#include "stackmc/sampling.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

using namespace stackmc;

namespace {

// All exponent tuples of total degree <= L, enumerated by brute force and
// ordered by degree, then descending lexicographically.
std::vector<std::vector<unsigned>> naive_exponents(std::size_t dim, unsigned degree) {
  std::vector<std::vector<unsigned>> all;
  std::vector<unsigned> e(dim, 0);
  while (true) {
    unsigned total = 0;
    for (unsigned v : e) total += v;
    if (total <= degree) all.push_back(e);
    std::size_t k = 0;
    while (k < dim && ++e[k] > degree) e[k++] = 0;
    if (k == dim) break;
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    unsigned sa = 0, sb = 0;
    for (unsigned v : a) sa += v;
    for (unsigned v : b) sb += v;
    if (sa != sb) return sa < sb;
    return a > b;
  });
  return all;
}

double naive_polynomial(const FitModel& m, const Eigen::VectorXd& x) {
  const auto exps = naive_exponents(m.dim(), m.degree());
  double total = 0.0;
  for (std::size_t k = 0; k < exps.size(); ++k) {
    double term = m.coefficients()[static_cast<Eigen::Index>(k)];
    for (std::size_t j = 0; j < m.dim(); ++j) term *= std::pow(x[static_cast<Eigen::Index>(j)], exps[k][j]);
    total += term;
  }
  return total;
}

TrainingSet grid_1d(double lo, double hi, double step, auto&& target) {
  const auto n = static_cast<Eigen::Index>(std::llround((hi - lo) / step)) + 1;
  TrainingSet t{RowMatrix(n, 1), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = lo + step * static_cast<double>(i);
    t.features(i, 0) = x;
    t.targets[i] = target(x);
  }
  return t;
}

double residual(const FitModel& m, const TrainingSet& t) {
  return (m.evaluate_rows(t.features) - t.targets).squaredNorm();
}

}  // namespace

TEST_CASE("monomial basis") {
  CHECK(monomial_count(1, 4) == 5);
  CHECK(monomial_count(2, 2) == 6);
  CHECK(monomial_count(100, 2) == 5151);
  CHECK(monomial_count(365, 1) == 366);

  const MonomialBasis b(2, 2);
  const std::vector<std::pair<unsigned, unsigned>> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  REQUIRE(b.size() == expected.size());
  for (std::size_t m = 0; m < b.size(); ++m) {
    CHECK(b.exponent(m, 0) == expected[m].first);
    CHECK(b.exponent(m, 1) == expected[m].second);
  }
  for (std::size_t dim : {1, 3, 4}) {
    for (unsigned deg : {0u, 1u, 3u}) {
      const MonomialBasis basis(dim, deg);
      const auto naive = naive_exponents(dim, deg);
      REQUIRE(basis.size() == naive.size());
      for (std::size_t m = 0; m < basis.size(); ++m)
        for (std::size_t j = 0; j < dim; ++j) CHECK(basis.exponent(m, j) == naive[m][j]);
      for (std::size_t m = 1; m < basis.size(); ++m) CHECK(basis.parent(m) < m);
    }
  }
}

TEST_CASE("polynomial evaluation") {
  const auto m = FitModel::polynomial(1, 2, Eigen::Vector3d(2, 3, 1));
  CHECK(m.evaluate(Eigen::VectorXd::Constant(1, 2.0)) == 12.0);
  CHECK_THROWS_AS(m.evaluate(Eigen::VectorXd::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(FitModel::polynomial(1, 2, Eigen::Vector2d(1, 1)), std::invalid_argument);

  std::mt19937_64 eng(3);
  std::normal_distribution<double> nd;
  for (std::size_t dim : {1, 2, 5}) {
    for (unsigned deg : {1u, 2u, 4u}) {
      const auto p = static_cast<Eigen::Index>(monomial_count(dim, deg));
      Eigen::VectorXd c(p);
      for (auto& v : c) v = nd(eng);
      const auto model = FitModel::polynomial(dim, deg, c);
      RowMatrix xs(20, static_cast<Eigen::Index>(dim));
      for (auto& v : xs.reshaped()) v = nd(eng);
      const Eigen::VectorXd rows = model.evaluate_rows(xs);
      for (Eigen::Index i = 0; i < xs.rows(); ++i) {
        const Eigen::VectorXd x = xs.row(i).transpose();
        const double ref = naive_polynomial(model, x);
        CHECK(model.evaluate(x) == doctest::Approx(ref).epsilon(1e-12));
        CHECK(rows[i] == model.evaluate(x));
      }
    }
  }
}

TEST_CASE("fit_polynomial") {
  SUBCASE("exact recovery") {
    const auto t = grid_1d(-2, 2, 0.01, [](double x) { return 2.0 + 3.0 * x + x * x; });
    const auto m = fit_polynomial(t, 2);
    CHECK(m.coefficients()[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(m.coefficients()[1] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(m.coefficients()[2] == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("constant targets") {
    const auto x = draw_normals(1, 400, 3);
    TrainingSet t{x.data(), Eigen::VectorXd::Constant(400, 4.5)};
    const auto m = fit_polynomial(t, 3);
    CHECK(m.coefficients()[0] == doctest::Approx(4.5).epsilon(1e-10));
    CHECK(m.coefficients().tail(m.coefficients().size() - 1).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("too few rows") {
    const auto x = draw_normals(1, 5, 1);
    TrainingSet t{x.data(), Eigen::VectorXd::Ones(5)};
    CHECK_THROWS_AS(fit_polynomial(t, 4), FitRefused);
    CHECK_NOTHROW(fit_polynomial(t, 3));
    TrainingSet bad{x.data(), Eigen::VectorXd::Ones(4)};
    CHECK_THROWS_AS(fit_polynomial(bad, 1), std::invalid_argument);
  }
  SUBCASE("duplicated feature resolves to the minimum-norm solution") {
    const auto z = draw_normals(2, 300, 1);
    RowMatrix x(300, 2);
    x.col(0) = z.data().col(0);
    x.col(1) = z.data().col(0);
    for (unsigned deg : {1u, 3u}) {
      const Eigen::VectorXd y = (x.col(0).array() * 2.0 + 1.0).matrix();
      const auto m = fit_polynomial(TrainingSet{x, y}, deg);
      CHECK(m.coefficients()[0] == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(m.coefficients()[1] == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(m.coefficients()[2] == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(residual(m, TrainingSet{x, y}) < 1e-16 * 300);
    }
  }
  SUBCASE("least-squares optimality under coefficient perturbation") {
    const auto x = draw_normals(3, 2000, 2);
    Eigen::VectorXd y(2000);
    for (Eigen::Index i = 0; i < 2000; ++i) y[i] = std::sin(x(i, 0)) * std::exp(0.3 * x(i, 1));
    const TrainingSet t{x.data(), y};
    for (unsigned deg : {2u, 3u}) {
      const auto m = fit_polynomial(t, deg);
      const double best = residual(m, t);
      for (Eigen::Index k = 0; k < m.coefficients().size(); ++k) {
        for (double eps : {1e-3, -1e-3}) {
          Eigen::VectorXd c = m.coefficients();
          c[k] += eps;
          CHECK(residual(FitModel::polynomial(2, deg, c), t) > best);
        }
      }
    }
  }
  SUBCASE("training residual never grows with degree") {
    const auto x = draw_normals(4, 3000, 1);
    const TrainingSet t{x.data(), bs_terminal_payoff(BSParams{}, x).values};
    double prev = INFINITY;
    for (unsigned deg = 0; deg <= 8; ++deg) {
      const double r = residual(fit_polynomial(t, deg), t);
      CHECK(r <= prev * (1.0 + 1e-9));
      prev = r;
    }
  }
  SUBCASE("normal equations agree with an orthogonal factorization") {
    const auto x = draw_normals(5, 3000, 12);
    Eigen::VectorXd y(3000);
    for (Eigen::Index i = 0; i < 3000; ++i) y[i] = std::exp(0.2 * x.data().row(i).sum()) + x(i, 3) * x(i, 7);
    const auto m = fit_polynomial(TrainingSet{x.data(), y}, 2);
    const MonomialBasis basis(12, 2);
    Eigen::MatrixXd design(3000, static_cast<Eigen::Index>(basis.size()));
    for (Eigen::Index i = 0; i < 3000; ++i) {
      Eigen::VectorXd row(static_cast<Eigen::Index>(basis.size()));
      basis.evaluate(x.data().row(i).data(), row.data());
      design.row(i) = row.transpose();
    }
    const Eigen::VectorXd ref = design.colPivHouseholderQr().solve(y);
    CHECK((m.coefficients() - ref).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("out-of-sample quality on the European payoff") {
    const BSParams p{};
    const auto train = draw_normals(10, 50000, 1);
    const auto test = draw_normals(11, 50000, 1);
    const auto m = fit_polynomial(TrainingSet{train.data(), bs_terminal_payoff(p, train).values}, 4);
    CHECK(oracle::correlation(m.evaluate_rows(test.data()), bs_terminal_payoff(p, test).values) > 0.99);
  }
}

TEST_CASE("fit_piecewise_linear") {
  SUBCASE("hinge recovery") {
    const auto t = grid_1d(-2, 4, 1e-3, [](double x) { return std::max(x - 1.0, 0.0); });
    const auto m = fit_piecewise_linear(t);
    REQUIRE(m.kind() == FitKind::piecewise_linear);
    CHECK(m.coefficients()[0] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(m.coefficients()[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(-m.hyperplane()->a0 / m.hyperplane()->a[0] - 1.0) < 1e-3);
    CHECK(m.evaluate(Eigen::VectorXd::Constant(1, 0.5)) == 0.0);
    CHECK(m.evaluate(Eigen::VectorXd::Constant(1, 3.0)) == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("all-positive targets match the degree-1 polynomial") {
    const auto x = draw_normals(6, 500, 3);
    Eigen::VectorXd y(500);
    for (Eigen::Index i = 0; i < 500; ++i) y[i] = 20.0 + x(i, 0) - 2.0 * x(i, 1) + 0.5 * x(i, 2) + 0.1 * std::sin(7.0 * x(i, 0));
    REQUIRE((y.array() > 0.0).all());
    const TrainingSet t{x.data(), y};
    const auto pw = fit_piecewise_linear(t);
    const auto poly = fit_polynomial(t, 1);
    CHECK((pw.coefficients() - poly.coefficients()).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("stored hyperplane is the fitted affine part") {
    const auto x = draw_normals(7, 2000, 4);
    const auto f = bs_asian_payoff(BSParams{}, MonitoringSchedule::equally_spaced(4, 1.0), x);
    const auto m = fit_piecewise_linear(TrainingSet{x.data(), f.values});
    CHECK(m.hyperplane()->a0 == m.coefficients()[0]);
    CHECK(m.hyperplane()->a == m.coefficients().tail(4));
    const Eigen::VectorXd g = m.evaluate_rows(x.data());
    for (Eigen::Index i = 0; i < 2000; ++i) {
      const Eigen::VectorXd xi = x.data().row(i).transpose();
      if (m.hyperplane()->side(xi) < 0.0) CHECK(g[i] == 0.0);
      CHECK(g[i] == doctest::Approx(m.evaluate(xi)).epsilon(1e-13));
    }
  }
  SUBCASE("explicit hyperplane") {
    const auto m = FitModel::piecewise_linear(Eigen::Vector2d(1.0, 0.0), TruncationHyperplane{0.0, Eigen::VectorXd::Constant(1, 1.0)});
    CHECK(m.evaluate(Eigen::VectorXd::Constant(1, 0.3)) == 1.0);
    CHECK(m.evaluate(Eigen::VectorXd::Constant(1, -0.3)) == 0.0);
    CHECK_THROWS_AS(FitModel::piecewise_linear(Eigen::Vector2d(1.0, 0.0), TruncationHyperplane{0.0, Eigen::VectorXd::Ones(2)}),
                    std::invalid_argument);
  }
  SUBCASE("too few positive targets") {
    const auto x = draw_normals(8, 100, 3);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(100);
    y.head(4).setOnes();
    CHECK_THROWS_AS(fit_piecewise_linear(TrainingSet{x.data(), y}), FitRefused);
    y.head(5).setOnes();
    CHECK_NOTHROW(fit_piecewise_linear(TrainingSet{x.data(), y}));
  }
}

TEST_CASE("text round trip") {
  std::mt19937_64 eng(12);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t dim = 1 + static_cast<std::size_t>(rep % 4);
    const unsigned deg = static_cast<unsigned>(rep % 5);
    Eigen::VectorXd c(static_cast<Eigen::Index>(monomial_count(dim, deg)));
    for (auto& v : c) v = nd(eng) * std::pow(10.0, rep % 7 - 3);
    const auto poly = FitModel::polynomial(dim, deg, c);
    const auto back = FitModel::from_text(poly.to_text());
    CHECK(back.kind() == FitKind::polynomial);
    CHECK(back.dim() == dim);
    CHECK(back.degree() == deg);
    CHECK(back.coefficients() == c);

    Eigen::VectorXd w(static_cast<Eigen::Index>(dim + 1));
    for (auto& v : w) v = nd(eng) / 3.0;
    const auto pw = FitModel::piecewise_linear(w);
    const auto pw_back = FitModel::from_text(pw.to_text());
    CHECK(pw_back.kind() == FitKind::piecewise_linear);
    CHECK(pw_back.coefficients() == w);
    CHECK(pw_back.hyperplane()->a0 == w[0]);

    TruncationHyperplane h{nd(eng), Eigen::VectorXd(static_cast<Eigen::Index>(dim))};
    for (auto& v : h.a) v = nd(eng);
    const auto explicit_back = FitModel::from_text(FitModel::piecewise_linear(w, h).to_text());
    CHECK(explicit_back.hyperplane()->a0 == h.a0);
    CHECK(explicit_back.hyperplane()->a == h.a);
  }
  CHECK_THROWS_AS(FitModel::from_text("kind quadratic\ndim 1\ndegree 1\ncoefficients 2 1 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(FitModel::from_text("kind polynomial\ndim 1\ndegree 1\ncoefficients 2 1\n"), std::invalid_argument);
}
