#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "deepdim/error.hpp"

namespace deepdim {

/// Dense real matrix, row-major, 64-bit entries. Rows are the feature
/// dimension D, columns the cluster members.
class Matrix {
public:
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0)
      throw InvalidInput("matrix must have at least one row and one column");
    data_.assign(rows * cols, 0.0);
  }

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (rows == 0 || cols == 0)
      throw InvalidInput("matrix must have at least one row and one column");
    if (data_.size() != rows * cols)
      throw InvalidInput("matrix value count " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }

  Matrix(std::initializer_list<std::initializer_list<double>> rows)
      : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    if (rows_ == 0 || cols_ == 0)
      throw InvalidInput("matrix must have at least one row and one column");
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_)
        throw InvalidInput("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t min_dim() const noexcept { return std::min(rows_, cols_); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c)
        t(c, r) = (*this)(r, c);
    return t;
  }

  /// First `count` columns.
  Matrix leading_columns(std::size_t count) const {
    if (count == 0 || count > cols_)
      throw InvalidInput("leading_columns: count out of range");
    Matrix out(rows_, count);
    for (std::size_t r = 0; r < rows_; ++r)
      std::copy_n(data_.begin() + r * cols_, count, out.data_.begin() + r * count);
    return out;
  }

  /// Subtracts each row's mean from that row.
  void center_rows() {
    for (std::size_t r = 0; r < rows_; ++r) {
      auto span = row(r);
      double mean = 0.0;
      for (double v : span)
        mean += v;
      mean /= static_cast<double>(cols_);
      for (double& v : span)
        v -= mean;
    }
  }

  Matrix& operator*=(double s) {
    for (double& v : data_)
      v *= s;
    return *this;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// Rows of `blocks` stacked top to bottom. All blocks need the same column count.
inline Matrix vstack(std::span<const Matrix> blocks) {
  if (blocks.empty())
    throw InvalidInput("vstack of zero blocks");
  const std::size_t cols = blocks.front().cols();
  std::size_t rows = 0;
  for (const auto& b : blocks) {
    if (b.cols() != cols)
      throw InvalidInput("vstack: column counts differ");
    rows += b.rows();
  }
  std::vector<double> values;
  values.reserve(rows * cols);
  for (const auto& b : blocks)
    values.insert(values.end(), b.values().begin(), b.values().end());
  return Matrix(rows, cols, std::move(values));
}

} // namespace deepdim
