#pragma once

// Clusters with a known intrinsic dimension, used to check the estimator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "deepdim/error.hpp"
#include "deepdim/matrix.hpp"
#include "deepdim/random.hpp"

namespace deepdim {

struct HyperplaneSpec {
  std::size_t ambient_dim = 0;   ///< D
  std::size_t intrinsic_dim = 0; ///< d
  std::size_t cluster_size = 0;  ///< n
  double noise_scale = 0.0;
  double coefficient_scale = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (ambient_dim == 0 || cluster_size == 0)
      throw InvalidInput("hyperplane spec: ambient dimension and cluster size must be positive");
    if (intrinsic_dim < 1 || intrinsic_dim > std::min(ambient_dim, cluster_size))
      throw InvalidInput("hyperplane spec: intrinsic dimension must lie in [1, min(D, n)] = [1, " +
                         std::to_string(std::min(ambient_dim, cluster_size)) + "]");
    if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale))
      throw InvalidInput("hyperplane spec: noise scale must be finite and >= 0");
    if (!(coefficient_scale > 0.0) || !std::isfinite(coefficient_scale))
      throw InvalidInput("hyperplane spec: coefficient scale must be finite and > 0");
  }
};

/// D x d matrix with orthonormal columns: Gaussian draws orthogonalized by
/// Gram-Schmidt with a second projection pass.
inline Matrix random_orthonormal_columns(std::size_t rows, std::size_t cols, Rng& rng) {
  if (cols > rows)
    throw InvalidInput("cannot fit more orthonormal columns than rows");
  std::normal_distribution<double> gauss(0.0, 1.0);
  // Column-major scratch so each basis vector is contiguous.
  std::vector<std::vector<double>> basis;
  basis.reserve(cols);
  while (basis.size() < cols) {
    std::vector<double> v(rows);
    for (double& x : v)
      x = gauss(rng);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) {
        const double proj = std::inner_product(v.begin(), v.end(), q.begin(), 0.0);
        for (std::size_t i = 0; i < rows; ++i)
          v[i] -= proj * q[i];
      }
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (norm < 1e-12)
      continue; // draw landed in the span already; redraw
    for (double& x : v)
      x /= norm;
    basis.push_back(std::move(v));
  }
  Matrix out(rows, cols);
  for (std::size_t c = 0; c < cols; ++c)
    for (std::size_t r = 0; r < rows; ++r)
      out(r, c) = basis[c][r];
  return out;
}

/// A = B * C + noise_scale * N with B orthonormal D x d, C Gaussian d x n
/// scaled by coefficient_scale, and N unit Gaussian D x n.
inline Matrix sample_hyperplane_cluster(const HyperplaneSpec& spec) {
  spec.validate();
  const std::size_t D = spec.ambient_dim;
  const std::size_t d = spec.intrinsic_dim;
  const std::size_t n = spec.cluster_size;

  Rng rng(spec.seed);
  const Matrix basis = random_orthonormal_columns(D, d, rng);

  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix coeff(d, n);
  for (double& v : coeff.values())
    v = spec.coefficient_scale * gauss(rng);

  Matrix out(D, n);
  for (std::size_t r = 0; r < D; ++r) {
    auto row = out.row(r);
    for (std::size_t k = 0; k < d; ++k) {
      const double b = basis(r, k);
      const auto crow = coeff.row(k);
      for (std::size_t s = 0; s < n; ++s)
        row[s] += b * crow[s];
    }
  }
  if (spec.noise_scale > 0.0)
    for (double& v : out.values())
      v += spec.noise_scale * gauss(rng);
  return out;
}

namespace detail {

inline void check_block_ranks(std::span<const std::size_t> ranks, std::size_t rows_per_block,
                              std::size_t n, bool shared) {
  if (ranks.empty())
    throw InvalidInput("at least one block is required");
  if (rows_per_block == 0 || n == 0)
    throw InvalidInput("block rows and cluster size must be positive");
  std::size_t used = 0;
  for (std::size_t r : ranks) {
    if (r == 0 || r > rows_per_block)
      throw InvalidInput("block rank " + std::to_string(r) + " must lie in [1, rows_per_block]");
    used = shared ? std::max(used, r) : used + r;
  }
  if (used > n)
    throw InvalidInput("block ranks need " + std::to_string(used) + " column coordinates but n = " +
                       std::to_string(n));
}

/// rows x n block G * E^T, G Gaussian rows x |coords|, E the unit vectors of `coords`.
inline Matrix coordinate_block(std::size_t rows, std::size_t n, std::span<const std::size_t> coords,
                               Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, n);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c : coords)
      m(r, c) = gauss(rng);
  return m;
}

} // namespace detail

/// Blocks whose row spaces are spanned by disjoint sets of coordinate vectors
/// in R^n, so stacking them adds their ranks exactly. Block i has rank
/// block_ranks[i] (almost surely, and with a comfortable condition number
/// since each block is a tall Gaussian on its coordinates).
inline std::vector<Matrix> sample_independent_blocks(std::span<const std::size_t> block_ranks,
                                                     std::size_t rows_per_block, std::size_t n,
                                                     std::uint64_t seed) {
  detail::check_block_ranks(block_ranks, rows_per_block, n, false);
  Rng rng(seed);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<Matrix> blocks;
  std::size_t offset = 0;
  for (std::size_t r : block_ranks) {
    std::span<const std::size_t> coords(perm.data() + offset, r);
    blocks.push_back(detail::coordinate_block(rows_per_block, n, coords, rng));
    offset += r;
  }
  return blocks;
}

/// Negative control: every block draws its rows from the same coordinate
/// subspace (of dimension max rank), so the stacked rank is the largest block
/// rank rather than the sum.
inline std::vector<Matrix> sample_shared_blocks(std::span<const std::size_t> block_ranks,
                                                std::size_t rows_per_block, std::size_t n,
                                                std::uint64_t seed) {
  detail::check_block_ranks(block_ranks, rows_per_block, n, true);
  Rng rng(seed);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<Matrix> blocks;
  for (std::size_t r : block_ranks) {
    // Rank r inside the shared subspace: a rows x r Gaussian times r unit
    // coordinate vectors from the common prefix of the permutation.
    std::span<const std::size_t> coords(perm.data(), r);
    blocks.push_back(detail::coordinate_block(rows_per_block, n, coords, rng));
  }
  return blocks;
}

} // namespace deepdim
