#pragma once

// Reference singular values through the Gram matrix and cyclic Jacobi.
// Squaring the matrix loses half the digits in the small singular values,
// so this is only a cross-check for well-conditioned test inputs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "deepdim/error.hpp"
#include "deepdim/linalg.hpp"
#include "deepdim/matrix.hpp"

namespace deepdim {

inline constexpr std::size_t gram_oracle_max_dim = 64;

namespace detail {

/// Eigenvalues of a symmetric n x n matrix (row-major, modified in place) by
/// cyclic Jacobi sweeps until the off-diagonal Frobenius norm drops below
/// 1e-14 * trace.
inline std::vector<double> jacobi_eigenvalues(std::vector<double>& a, std::size_t n) {
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    trace += std::abs(at(i, i));
  const double target = 1e-14 * trace;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j)
          s += at(i, j) * at(i, j);
    return std::sqrt(s);
  };

  constexpr int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps && off_norm() >= target && trace > 0.0; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0)
          continue;
        // Rotation angle that annihilates a(p,q) (Rutishauser's formulation).
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(p, k);
          const double aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i)
    eig[i] = at(i, i);
  return eig;
}

} // namespace detail

/// Singular values as square roots of the eigenvalues of the smaller Gram
/// matrix (m^T m when tall, m m^T when wide). Refuses min(rows, cols) > 64.
inline SingularSpectrum gram_eigen_oracle(const Matrix& m) {
  const std::size_t k = m.min_dim();
  if (k > gram_oracle_max_dim)
    throw InvalidInput("gram_eigen_oracle: min dimension " + std::to_string(k) +
                       " exceeds test-scale limit " + std::to_string(gram_oracle_max_dim));
  if (!m.all_finite())
    throw InvalidInput("gram_eigen_oracle: matrix has non-finite entries");

  const bool tall = m.rows() >= m.cols();
  const std::size_t inner = tall ? m.rows() : m.cols();
  auto elem = [&](std::size_t outer, std::size_t i) { return tall ? m(i, outer) : m(outer, i); };

  std::vector<double> gram(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < inner; ++t)
        s += elem(i, t) * elem(j, t);
      gram[i * k + j] = s;
      gram[j * k + i] = s;
    }

  auto eig = detail::jacobi_eigenvalues(gram, k);
  for (double& e : eig)
    e = std::sqrt(std::max(e, 0.0));
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return SingularSpectrum(std::move(eig));
}

} // namespace deepdim
