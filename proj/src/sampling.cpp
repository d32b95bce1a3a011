#include "stackmc/sampling.hpp"

#include "stackmc/normal_dist.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

namespace stackmc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t block_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t block) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64((stream << 48) ^ block));
}

// (k + 0.5) / 2^53 never hits 0 or 1.
double open_uniform(std::mt19937_64& eng) noexcept {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

void fill_block(RowMatrix& out, std::uint64_t seed, std::uint64_t stream, std::size_t block) {
  const std::size_t first = block * kRowsPerBlock;
  const std::size_t last = std::min<std::size_t>(first + kRowsPerBlock, out.rows());
  std::mt19937_64 eng(block_seed(seed, stream, block));
  double* p = out.data() + first * out.cols();
  double* end = out.data() + last * out.cols();
  for (; p != end; ++p) *p = norm_inv(open_uniform(eng));
}

RowMatrix draw_stream(std::uint64_t seed, std::uint64_t stream, std::size_t n_paths,
                      std::size_t n_steps, DrawOptions opts) {
  if (n_paths == 0 || n_steps == 0)
    throw std::invalid_argument("draw_normals: n_paths and n_steps must be positive");
  RowMatrix out(n_paths, n_steps);
  const std::size_t n_blocks = (n_paths + kRowsPerBlock - 1) / kRowsPerBlock;
  const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, n_blocks));
  if (threads == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) fill_block(out, seed, stream, b);
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t b = t; b < n_blocks; b += threads) fill_block(out, seed, stream, b);
    });
  }
  return out;
}

}  // namespace

PathIncrements::PathIncrements(RowMatrix data) : data_(std::move(data)) {
  if (data_.rows() == 0 || data_.cols() == 0)
    throw std::invalid_argument("PathIncrements: dimensions must be positive");
}

PathIncrements draw_normals(std::uint64_t seed, std::size_t n_paths, std::size_t n_steps,
                            DrawOptions opts) {
  return PathIncrements(draw_stream(seed, 0, n_paths, n_steps, opts));
}

CorrelatedPair draw_correlated(std::uint64_t seed, std::size_t n_paths, std::size_t n_steps,
                               double rho, DrawOptions opts) {
  if (!(std::abs(rho) <= 1.0))
    throw std::invalid_argument("draw_correlated: rho must lie in [-1, 1]");
  RowMatrix w = draw_stream(seed, 0, n_paths, n_steps, opts);
  RowMatrix b = draw_stream(seed, 1, n_paths, n_steps, opts);
  const double comp = std::sqrt(1.0 - rho * rho);
  b = rho * w + comp * b;
  return CorrelatedPair{PathIncrements(std::move(w)), PathIncrements(std::move(b)), rho};
}

PathIncrements antithetic_extend(const PathIncrements& x) {
  RowMatrix out(2 * x.data().rows(), x.data().cols());
  out.topRows(x.data().rows()) = x.data();
  out.bottomRows(x.data().rows()) = -x.data();
  return PathIncrements(std::move(out));
}

}  // namespace stackmc
