#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "deepdim/error.hpp"
#include "deepdim/linalg.hpp"

namespace deepdim {

inline constexpr double default_theta = 1e5;

/// log10 value reported for an exact zero (and the floor for subnormals).
inline constexpr double log_zero_sentinel = -320.0;

/// Outcome of scanning a spectrum for the first ratio sigma_j / sigma_{j+1}
/// above theta.
///
/// Three shapes are possible:
///  - a drop was found: drop_index == dimension, drop_ratio > theta;
///  - no drop: full_space, dimension == spectrum length;
///  - degenerate (all-zero spectrum): dimension 0, not full_space, no drop.
struct DropReport {
  std::size_t dimension = 0;
  std::optional<std::size_t> drop_index;
  std::optional<double> drop_ratio; ///< +inf when the value after the drop is exactly zero
  double theta = default_theta;
  bool full_space = false;
  std::vector<double> log_values;

  bool degenerate() const noexcept { return !full_space && !drop_index.has_value(); }
};

/// Elementwise log10, exact zeros mapped to log_zero_sentinel.
inline std::vector<double> log_spectrum(const SingularSpectrum& s) {
  std::vector<double> out;
  out.reserve(s.size());
  for (double v : s.values())
    out.push_back(v > 0.0 ? std::max(std::log10(v), log_zero_sentinel) : log_zero_sentinel);
  return out;
}

/// Ratio sigma_j / sigma_{j+1} for 1-based j; +inf for a positive value
/// followed by zero, 0 when both are zero.
inline double drop_ratio_at(const SingularSpectrum& s, std::size_t j) {
  const double hi = s[j - 1];
  const double lo = s[j];
  if (lo > 0.0)
    return hi / lo;
  return hi > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

/// Smallest j >= 1 with sigma_j / sigma_{j+1} > theta.
inline DropReport detect_drop(const SingularSpectrum& s, double theta = default_theta) {
  if (s.empty())
    throw InvalidInput("detect_drop: empty spectrum");
  if (!(theta > 1.0) || !std::isfinite(theta))
    throw InvalidInput("detect_drop: theta must be a finite number greater than 1");

  DropReport report;
  report.theta = theta;
  report.log_values = log_spectrum(s);

  if (s.largest() == 0.0)
    return report; // zero matrix: 0-dimensional

  for (std::size_t j = 1; j < s.size(); ++j) {
    const double ratio = drop_ratio_at(s, j);
    if (ratio > theta) {
      report.dimension = j;
      report.drop_index = j;
      report.drop_ratio = ratio;
      return report;
    }
  }
  report.full_space = true;
  report.dimension = s.size();
  return report;
}

} // namespace deepdim
