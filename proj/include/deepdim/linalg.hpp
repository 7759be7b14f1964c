#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <new>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "deepdim/error.hpp"
#include "deepdim/matrix.hpp"

namespace deepdim {

/// Singular values of a matrix, descending and non-negative.
class SingularSpectrum {
public:
  SingularSpectrum() = default;

  explicit SingularSpectrum(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!(values_[i] >= 0.0) || !std::isfinite(values_[i]))
        throw InvalidInput("singular values must be finite and non-negative");
      if (i > 0 && values_[i] > values_[i - 1])
        throw InvalidInput("singular values must be sorted descending");
    }
  }

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double largest() const { return values_.empty() ? 0.0 : values_.front(); }

  SingularSpectrum scaled(double c) const {
    std::vector<double> v(values_);
    for (double& x : v)
      x *= c;
    return SingularSpectrum(std::move(v));
  }

  friend bool operator==(const SingularSpectrum&, const SingularSpectrum&) = default;

private:
  std::vector<double> values_;
};

/// All min(rows, cols) singular values of `m`, computed by divide-and-conquer
/// bidiagonal SVD without singular vectors. The wide case is transposed first
/// so the decomposition always runs on a tall matrix.
inline SingularSpectrum singular_values(const Matrix& m) {
  if (!m.all_finite())
    throw InvalidInput("singular_values: matrix has non-finite entries");

  constexpr auto max_index = static_cast<std::size_t>(std::numeric_limits<Eigen::Index>::max());
  if (m.rows() > max_index / m.cols())
    throw ResourceError("singular_values: matrix too large for workspace");

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> view(m.values().data(), static_cast<Eigen::Index>(m.rows()),
                                        static_cast<Eigen::Index>(m.cols()));
  try {
    Eigen::MatrixXd tall;
    if (m.rows() >= m.cols())
      tall = view;
    else
      tall = view.transpose();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(tall);
    const auto& sv = svd.singularValues();
    std::vector<double> out(sv.data(), sv.data() + sv.size());
    // BDCSVD returns them sorted; clamp the sign of exact zeros it may emit as -0.
    for (double& v : out)
      v = std::max(v, 0.0);
    std::sort(out.begin(), out.end(), std::greater<>());
    return SingularSpectrum(std::move(out));
  } catch (const std::bad_alloc&) {
    throw ResourceError("singular_values: out of memory for " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()) + " workspace");
  }
}

/// Number of singular values strictly greater than rel_tol * largest.
inline std::size_t numerical_rank(const SingularSpectrum& s, double rel_tol) {
  if (s.empty() || s.largest() == 0.0)
    return 0;
  const double cutoff = rel_tol * s.largest();
  return static_cast<std::size_t>(
      std::count_if(s.values().begin(), s.values().end(), [&](double v) { return v > cutoff; }));
}

} // namespace deepdim
