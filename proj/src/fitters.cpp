#include "stackmc/fitters.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

namespace stackmc {

namespace {

// Design matrices up to this many entries may be factorized directly.
constexpr std::size_t kDirectMaxEntries = 30'000'000;
constexpr Eigen::Index kNormalBlockRows = 1024;

void append_degree(std::size_t dim, unsigned remaining, std::size_t pos,
                   std::vector<std::uint8_t>& current, std::vector<std::uint8_t>& out) {
  if (pos + 1 == dim) {
    current[pos] = static_cast<std::uint8_t>(remaining);
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  for (int e = static_cast<int>(remaining); e >= 0; --e) {
    current[pos] = static_cast<std::uint8_t>(e);
    append_degree(dim, remaining - static_cast<unsigned>(e), pos + 1, current, out);
  }
  current[pos] = 0;
}

Eigen::VectorXd solve_direct(const RowMatrix& features, const Eigen::VectorXd& targets,
                             const MonomialBasis& basis) {
  const Eigen::Index n = features.rows();
  const Eigen::Index p = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd row(p);
  for (Eigen::Index i = 0; i < n; ++i) {
    basis.evaluate(features.row(i).data(), row.data());
    design.row(i) = row.transpose();
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  return cod.solve(targets);
}

Eigen::VectorXd solve_normal(const RowMatrix& features, const Eigen::VectorXd& targets,
                             const MonomialBasis& basis, double ridge, bool& rank_deficient) {
  const Eigen::Index n = features.rows();
  const Eigen::Index p = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
  RowMatrix block(std::min(n, kNormalBlockRows), p);
  for (Eigen::Index start = 0; start < n; start += kNormalBlockRows) {
    const Eigen::Index rows = std::min(kNormalBlockRows, n - start);
    for (Eigen::Index r = 0; r < rows; ++r)
      basis.evaluate(features.row(start + r).data(), block.row(r).data());
    auto b = block.topRows(rows);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(b.transpose());
    rhs.noalias() += b.transpose() * targets.segment(start, rows);
  }
  // Intercept is not penalised.
  if (ridge > 0.0) gram.diagonal().tail(p - 1).array() += ridge;

  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(gram);
  if (llt.info() == Eigen::Success) {
    const auto diag = llt.matrixLLT().diagonal();
    const double lo = diag.minCoeff();
    const double hi = diag.maxCoeff();
    if (lo > 0.0 && (lo * lo) / (hi * hi) > 1e-13) {
      rank_deficient = false;
      return llt.solve(rhs);
    }
  }
  rank_deficient = true;
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double cut = lambda.cwiseAbs().maxCoeff() * static_cast<double>(p) *
                     std::numeric_limits<double>::epsilon();
  Eigen::VectorXd proj = eig.eigenvectors().transpose() * rhs;
  for (Eigen::Index k = 0; k < p; ++k) proj[k] = lambda[k] > cut ? proj[k] / lambda[k] : 0.0;
  return eig.eigenvectors() * proj;
}

void check_training_set(const TrainingSet& train) {
  if (train.features.rows() != train.targets.size())
    throw std::invalid_argument("training set: feature rows and target count differ");
  if (train.features.cols() == 0) throw std::invalid_argument("training set: zero features");
}

}  // namespace

std::size_t monomial_count(std::size_t dim, unsigned degree) {
  // C(dim + degree, degree) built incrementally; each partial product is an
  // exact binomial coefficient.
  std::size_t c = 1;
  for (unsigned k = 1; k <= degree; ++k) {
    const std::size_t num = dim + k;
    if (c > std::numeric_limits<std::size_t>::max() / num)
      return std::numeric_limits<std::size_t>::max();
    c = c * num / k;
  }
  return c;
}

MonomialBasis::MonomialBasis(std::size_t dim, unsigned degree) : dim_(dim), degree_(degree) {
  if (dim == 0) throw std::invalid_argument("MonomialBasis: dim must be positive");
  if (degree > 255) throw std::invalid_argument("MonomialBasis: degree above 255");
  const std::size_t count = monomial_count(dim, degree);
  if (count == std::numeric_limits<std::size_t>::max())
    throw std::invalid_argument("MonomialBasis: basis too large");
  exponents_.reserve(count * dim);
  std::vector<std::uint8_t> current(dim, 0);
  for (unsigned d = 0; d <= degree; ++d) append_degree(dim, d, 0, current, exponents_);

  parent_.assign(count, 0);
  var_.assign(count, 0);
  std::map<std::vector<std::uint8_t>, std::size_t> index;
  for (std::size_t m = 0; m < count; ++m) {
    std::vector<std::uint8_t> key(exponents_.begin() + m * dim, exponents_.begin() + (m + 1) * dim);
    if (m > 0) {
      const auto first = std::find_if(key.begin(), key.end(), [](std::uint8_t e) { return e != 0; });
      const auto j = static_cast<std::size_t>(first - key.begin());
      std::vector<std::uint8_t> up = key;
      --up[j];
      parent_[m] = index.at(up);
      var_[m] = j;
    }
    index.emplace(std::move(key), m);
  }
}

void MonomialBasis::evaluate(const double* x, double* out) const {
  out[0] = 1.0;
  for (std::size_t m = 1; m < parent_.size(); ++m) out[m] = out[parent_[m]] * x[var_[m]];
}

FitModel FitModel::polynomial(std::size_t dim, unsigned degree, Eigen::VectorXd coefficients) {
  auto basis = std::make_shared<const MonomialBasis>(dim, degree);
  if (static_cast<std::size_t>(coefficients.size()) != basis->size())
    throw std::invalid_argument("FitModel::polynomial: expected " + std::to_string(basis->size()) +
                                " coefficients, got " + std::to_string(coefficients.size()));
  FitModel m;
  m.kind_ = FitKind::polynomial;
  m.dim_ = dim;
  m.degree_ = degree;
  m.coefficients_ = std::move(coefficients);
  m.basis_ = std::move(basis);
  return m;
}

FitModel FitModel::piecewise_linear(Eigen::VectorXd coefficients) {
  if (coefficients.size() < 2)
    throw std::invalid_argument("FitModel::piecewise_linear: need c_0 and at least one slope");
  FitModel m;
  m.kind_ = FitKind::piecewise_linear;
  m.dim_ = static_cast<std::size_t>(coefficients.size() - 1);
  m.degree_ = 1;
  m.hyperplane_ = TruncationHyperplane{coefficients[0], coefficients.tail(m.dim_)};
  m.coefficients_ = std::move(coefficients);
  return m;
}

FitModel FitModel::piecewise_linear(Eigen::VectorXd coefficients, TruncationHyperplane plane) {
  FitModel m = piecewise_linear(std::move(coefficients));
  if (static_cast<std::size_t>(plane.a.size()) != m.dim_)
    throw std::invalid_argument("FitModel::piecewise_linear: hyperplane dimension mismatch");
  m.self_truncated_ = false;
  m.hyperplane_ = std::move(plane);
  return m;
}

double FitModel::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_)
    throw std::invalid_argument("FitModel::evaluate: expected " + std::to_string(dim_) +
                                " features, got " + std::to_string(x.size()));
  if (kind_ == FitKind::piecewise_linear) {
    const double s = hyperplane_->side(x);
    return s < 0.0 ? 0.0 : coefficients_[0] + coefficients_.tail(dim_).dot(x);
  }
  Eigen::VectorXd mono(basis_->size());
  const Eigen::VectorXd xc = x;
  basis_->evaluate(xc.data(), mono.data());
  return coefficients_.dot(mono);
}

Eigen::VectorXd FitModel::evaluate_rows(const RowMatrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != dim_)
    throw std::invalid_argument("FitModel::evaluate_rows: expected " + std::to_string(dim_) +
                                " columns, got " + std::to_string(x.cols()));
  if (kind_ == FitKind::piecewise_linear) {
    Eigen::VectorXd s = x * hyperplane_->a;
    s.array() += hyperplane_->a0;
    // Affine part and hyperplane coincide, so the value is the side itself.
    if (self_truncated_) return s.cwiseMax(0.0);
    Eigen::VectorXd v = x * coefficients_.tail(dim_);
    v.array() += coefficients_[0];
    return (s.array() < 0.0).select(0.0, v);
  }
  Eigen::VectorXd out(x.rows());
  Eigen::VectorXd mono(basis_->size());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    basis_->evaluate(x.row(i).data(), mono.data());
    out[i] = coefficients_.dot(mono);
  }
  return out;
}

std::string FitModel::to_text() const {
  std::ostringstream os;
  char buf[40];
  os << "kind " << (kind_ == FitKind::polynomial ? "polynomial" : "piecewise_linear") << '\n'
     << "dim " << dim_ << '\n'
     << "degree " << degree_ << '\n'
     << "coefficients " << coefficients_.size();
  for (Eigen::Index k = 0; k < coefficients_.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", coefficients_[k]);
    os << ' ' << buf;
  }
  os << '\n';
  if (!self_truncated_ && hyperplane_) {
    std::snprintf(buf, sizeof buf, "%.17g", hyperplane_->a0);
    os << "hyperplane " << buf;
    for (Eigen::Index k = 0; k < hyperplane_->a.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", hyperplane_->a[k]);
      os << ' ' << buf;
    }
    os << '\n';
  }
  return os.str();
}

FitModel FitModel::from_text(const std::string& text) {
  std::istringstream is(text);
  std::string key, kind;
  std::size_t dim = 0, count = 0;
  unsigned degree = 0;
  auto expect = [&](const char* want) {
    if (!(is >> key) || key != want)
      throw std::invalid_argument(std::string("FitModel::from_text: expected '") + want + "'");
  };
  expect("kind");
  is >> kind;
  expect("dim");
  is >> dim;
  expect("degree");
  is >> degree;
  expect("coefficients");
  is >> count;
  Eigen::VectorXd c(static_cast<Eigen::Index>(count));
  for (std::size_t k = 0; k < count; ++k) {
    std::string tok;
    if (!(is >> tok)) throw std::invalid_argument("FitModel::from_text: truncated coefficients");
    c[static_cast<Eigen::Index>(k)] = std::stod(tok);
  }
  if (kind == "polynomial") return polynomial(dim, degree, std::move(c));
  if (kind == "piecewise_linear") {
    if (count != dim + 1) throw std::invalid_argument("FitModel::from_text: bad coefficient count");
    if (!(is >> key)) return piecewise_linear(std::move(c));
    if (key != "hyperplane") throw std::invalid_argument("FitModel::from_text: expected 'hyperplane'");
    TruncationHyperplane h;
    h.a.resize(static_cast<Eigen::Index>(dim));
    std::string tok;
    if (!(is >> tok)) throw std::invalid_argument("FitModel::from_text: truncated hyperplane");
    h.a0 = std::stod(tok);
    for (std::size_t k = 0; k < dim; ++k) {
      if (!(is >> tok)) throw std::invalid_argument("FitModel::from_text: truncated hyperplane");
      h.a[static_cast<Eigen::Index>(k)] = std::stod(tok);
    }
    return piecewise_linear(std::move(c), std::move(h));
  }
  throw std::invalid_argument("FitModel::from_text: unknown kind '" + kind + "'");
}

Eigen::VectorXd least_squares(const RowMatrix& features, const Eigen::VectorXd& targets,
                              const MonomialBasis& basis, FitOptions opts) {
  const auto n = static_cast<std::size_t>(features.rows());
  const std::size_t p = basis.size();
  const bool fits_in_memory = n * p <= kDirectMaxEntries;
  // Degree > 2: factorize the design matrix directly.
  if (opts.ridge == 0.0 && basis.degree() > 2 && fits_in_memory)
    return solve_direct(features, targets, basis);
  bool rank_deficient = false;
  Eigen::VectorXd c = solve_normal(features, targets, basis, opts.ridge, rank_deficient);
  if (rank_deficient && opts.ridge == 0.0 && fits_in_memory)
    return solve_direct(features, targets, basis);
  return c;
}

FitModel fit_polynomial(const TrainingSet& train, unsigned degree, FitOptions opts) {
  check_training_set(train);
  const auto dim = static_cast<std::size_t>(train.features.cols());
  const std::size_t p = monomial_count(dim, degree);
  if (static_cast<std::size_t>(train.features.rows()) <= p)
    throw FitRefused("fit_polynomial: " + std::to_string(train.features.rows()) +
                     " rows cannot determine " + std::to_string(p) + " coefficients");
  if (p > kLargeBasisWarning)
    std::cerr << "warning: polynomial basis has " << p << " terms (dim " << dim << ", degree "
              << degree << "); expect heavy memory use\n";
  const MonomialBasis basis(dim, degree);
  return FitModel::polynomial(dim, degree, least_squares(train.features, train.targets, basis, opts));
}

FitModel fit_piecewise_linear(const TrainingSet& train, FitOptions opts) {
  check_training_set(train);
  const auto dim = static_cast<std::size_t>(train.features.cols());
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(train.targets.size()));
  for (Eigen::Index i = 0; i < train.targets.size(); ++i)
    if (train.targets[i] > 0.0) keep.push_back(i);
  if (keep.size() < dim + 2)
    throw FitRefused("fit_piecewise_linear: only " + std::to_string(keep.size()) +
                     " positive targets for " + std::to_string(dim) + " features");
  RowMatrix x(static_cast<Eigen::Index>(keep.size()), train.features.cols());
  Eigen::VectorXd y(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    x.row(static_cast<Eigen::Index>(r)) = train.features.row(keep[r]);
    y[static_cast<Eigen::Index>(r)] = train.targets[keep[r]];
  }
  const MonomialBasis basis(dim, 1);
  return FitModel::piecewise_linear(least_squares(x, y, basis, opts));
}

}  // namespace stackmc
