#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>

namespace stackmc {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// N x M matrix of standard-normal draws; paths are rows, time steps are
/// columns. Immutable once built.
class PathIncrements {
 public:
  PathIncrements() = default;
  explicit PathIncrements(RowMatrix data);

  const RowMatrix& data() const noexcept { return data_; }
  std::size_t n_paths() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  std::size_t n_steps() const noexcept { return static_cast<std::size_t>(data_.cols()); }
  double operator()(std::size_t path, std::size_t step) const { return data_(path, step); }

 private:
  RowMatrix data_;
};

struct CorrelatedPair {
  PathIncrements w;
  PathIncrements b;
  double rho = 0.0;
};

/// Options controlling how a draw is executed. None of them change the output.
struct DrawOptions {
  unsigned threads = 1;
};

/// Rows are generated in fixed blocks of this many paths. Each block owns a
/// 64-bit Mersenne Twister seeded from (seed, stream, block), so the matrix
/// depends only on (seed, dims) and never on the thread count.
inline constexpr std::size_t kRowsPerBlock = 256;

/// Independent N(0,1) draws via inverse-CDF (AS241) of open-interval uniforms.
PathIncrements draw_normals(std::uint64_t seed, std::size_t n_paths, std::size_t n_steps,
                            DrawOptions opts = {});

/// w is exactly draw_normals(seed, ...); b = rho*w + sqrt(1-rho^2)*z with z
/// drawn from an independent stream of the same seed.
CorrelatedPair draw_correlated(std::uint64_t seed, std::size_t n_paths, std::size_t n_steps,
                               double rho, DrawOptions opts = {});

/// Rows of x followed by their negations (2N x M).
PathIncrements antithetic_extend(const PathIncrements& x);

}  // namespace stackmc
