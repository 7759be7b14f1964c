#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "deepdim/error.hpp"
#include "deepdim/linalg.hpp"
#include "deepdim/matrix.hpp"
#include "deepdim/parallel.hpp"
#include "deepdim/spectrum.hpp"

namespace deepdim {

/// One layer's activations over a cluster of n inputs.
///
/// Storage order is [sample][channel][row][col], which keeps each feature
/// map of a sample contiguous. Fully connected layers use C = 1, H = units,
/// W = 1, so the whole layer is a single "feature map".
class LayerActivations {
public:
  LayerActivations(std::string name, std::size_t height, std::size_t width, std::size_t channels,
                   std::size_t cluster_size)
      : LayerActivations(std::move(name), height, width, channels, cluster_size,
                         std::vector<double>(height * width * channels * cluster_size, 0.0)) {}

  LayerActivations(std::string name, std::size_t height, std::size_t width, std::size_t channels,
                   std::size_t cluster_size, std::vector<double> data)
      : name_(std::move(name)), height_(height), width_(width), channels_(channels),
        cluster_size_(cluster_size), data_(std::move(data)) {
    if (height == 0 || width == 0 || channels == 0 || cluster_size == 0)
      throw InvalidInput("layer '" + name_ + "': all dimensions must be positive");
    if (data_.size() != height * width * channels * cluster_size)
      throw InvalidInput("layer '" + name_ + "': data size does not match n*C*H*W");
    if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); }))
      throw InvalidInput("layer '" + name_ + "': non-finite activation");
  }

  static LayerActivations fully_connected(std::string name, std::size_t units,
                                          std::size_t cluster_size, std::vector<double> data) {
    return LayerActivations(std::move(name), units, 1, 1, cluster_size, std::move(data));
  }

  const std::string& name() const noexcept { return name_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t cluster_size() const noexcept { return cluster_size_; }
  std::size_t map_size() const noexcept { return height_ * width_; }
  /// Activation-space dimension D = H * W * C.
  std::size_t dimension() const noexcept { return map_size() * channels_; }

  std::span<const double> data() const noexcept { return data_; }

  double at(std::size_t sample, std::size_t channel, std::size_t row, std::size_t col) const {
    return data_[((sample * channels_ + channel) * height_ + row) * width_ + col];
  }

  /// First `count` samples; models a smaller cluster nested in this one.
  LayerActivations leading_samples(std::size_t count) const {
    if (count == 0 || count > cluster_size_)
      throw InvalidInput("leading_samples: count out of range");
    const std::size_t per = dimension();
    return LayerActivations(name_, height_, width_, channels_, count,
                            std::vector<double>(data_.begin(), data_.begin() + count * per));
  }

  friend bool operator==(const LayerActivations&, const LayerActivations&) = default;

private:
  std::string name_;
  std::size_t height_;
  std::size_t width_;
  std::size_t channels_;
  std::size_t cluster_size_;
  std::vector<double> data_;
};

/// Layer whose channel c is maps[c]; each map's rows are H*W pixels
/// (row-major, height x width) and its columns the n samples.
inline LayerActivations layer_from_maps(std::string name, std::span<const Matrix> maps,
                                        std::size_t height, std::size_t width) {
  if (maps.empty())
    throw InvalidInput("layer_from_maps: no maps");
  const std::size_t hw = height * width;
  const std::size_t n = maps.front().cols();
  for (const auto& m : maps)
    if (m.rows() != hw || m.cols() != n)
      throw InvalidInput("layer_from_maps: every map must be (H*W) x n");
  const std::size_t C = maps.size();
  std::vector<double> data(n * C * hw);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t p = 0; p < hw; ++p)
        data[(s * C + c) * hw + p] = maps[c](p, s);
  return LayerActivations(std::move(name), height, width, C, n, std::move(data));
}

/// Fully connected layer (C = 1) holding the D x n matrix `m`.
inline LayerActivations layer_from_matrix(std::string name, const Matrix& m) {
  return layer_from_maps(std::move(name), std::span<const Matrix>(&m, 1), m.rows(), 1);
}

struct LogSpectrum {
  std::string source; ///< "map:<index>", "concatenated" or "original"
  std::vector<double> log10;

  friend bool operator==(const LogSpectrum&, const LogSpectrum&) = default;
};

/// Per-layer result of the estimated / concatenated / original calculus.
struct DimensionSummary {
  std::string layer_name;
  std::vector<std::size_t> map_indices;
  std::vector<std::size_t> per_map_dimensions;
  std::size_t estimated = 0;
  std::optional<std::size_t> concatenated;
  std::optional<std::size_t> original;
  double theta = default_theta;
  std::size_t cluster_size = 0;
  std::vector<LogSpectrum> spectra;

  friend bool operator==(const DimensionSummary&, const DimensionSummary&) = default;
};

struct EstimateOptions {
  double theta = default_theta;
  /// Subtract each feature's mean over the cluster before the SVD.
  bool center = false;
  std::size_t workers = 1;
};

/// (H*W) x n matrix of one feature map; column s is sample s's map, flattened
/// row-major.
inline Matrix feature_map_matrix(const LayerActivations& acts, std::size_t map_index) {
  if (map_index >= acts.channels())
    throw InvalidInput("feature map index " + std::to_string(map_index) + " out of range for layer '" +
                       acts.name() + "' with " + std::to_string(acts.channels()) + " maps");
  const std::size_t hw = acts.map_size();
  const std::size_t n = acts.cluster_size();
  Matrix m(hw, n);
  const auto data = acts.data();
  for (std::size_t s = 0; s < n; ++s) {
    const double* src = data.data() + (s * acts.channels() + map_index) * hw;
    for (std::size_t p = 0; p < hw; ++p)
      m(p, s) = src[p];
  }
  return m;
}

namespace detail {

inline void check_distinct(const LayerActivations& acts, std::span<const std::size_t> indices) {
  if (indices.empty())
    throw InvalidInput("at least one feature map index is required");
  std::set<std::size_t> seen;
  for (std::size_t i : indices) {
    if (i >= acts.channels())
      throw InvalidInput("feature map index " + std::to_string(i) + " out of range for layer '" +
                         acts.name() + "'");
    if (!seen.insert(i).second)
      throw InvalidInput("feature map index " + std::to_string(i) + " listed twice");
  }
}

inline SingularSpectrum spectrum_of(Matrix m, bool center) {
  if (center)
    m.center_rows();
  return singular_values(m);
}

inline std::vector<std::size_t> all_maps(const LayerActivations& acts) {
  std::vector<std::size_t> idx(acts.channels());
  for (std::size_t i = 0; i < idx.size(); ++i)
    idx[i] = i;
  return idx;
}

} // namespace detail

/// Vertical stack of the selected per-map matrices, (k*H*W) x n.
inline Matrix concatenate_maps(const LayerActivations& acts, std::span<const std::size_t> map_indices) {
  detail::check_distinct(acts, map_indices);
  const std::size_t hw = acts.map_size();
  const std::size_t n = acts.cluster_size();
  Matrix m(map_indices.size() * hw, n);
  const auto data = acts.data();
  for (std::size_t b = 0; b < map_indices.size(); ++b)
    for (std::size_t s = 0; s < n; ++s) {
      const double* src = data.data() + (s * acts.channels() + map_indices[b]) * hw;
      for (std::size_t p = 0; p < hw; ++p)
        m(b * hw + p, s) = src[p];
    }
  return m;
}

/// Drop-detected dimension of each selected map, summed.
inline DimensionSummary estimated_dimension(const LayerActivations& acts,
                                            std::span<const std::size_t> map_indices,
                                            const EstimateOptions& opts = {}) {
  detail::check_distinct(acts, map_indices);
  if (!(opts.theta > 1.0))
    throw InvalidInput("theta must be greater than 1");

  DimensionSummary out;
  out.layer_name = acts.name();
  out.map_indices.assign(map_indices.begin(), map_indices.end());
  out.theta = opts.theta;
  out.cluster_size = acts.cluster_size();
  out.per_map_dimensions.assign(map_indices.size(), 0);

  parallel_for(map_indices.size(), opts.workers, [&](std::size_t i) {
    const auto s = detail::spectrum_of(feature_map_matrix(acts, map_indices[i]), opts.center);
    out.per_map_dimensions[i] = detect_drop(s, opts.theta).dimension;
  });
  for (std::size_t d : out.per_map_dimensions)
    out.estimated += d;
  return out;
}

inline DimensionSummary estimated_dimension(const LayerActivations& acts,
                                            std::span<const std::size_t> map_indices, double theta) {
  return estimated_dimension(acts, map_indices, EstimateOptions{.theta = theta});
}

inline DropReport concatenated_report(const LayerActivations& acts,
                                      std::span<const std::size_t> map_indices,
                                      const EstimateOptions& opts = {}) {
  return detect_drop(detail::spectrum_of(concatenate_maps(acts, map_indices), opts.center), opts.theta);
}

inline std::size_t concatenated_dimension(const LayerActivations& acts,
                                          std::span<const std::size_t> map_indices,
                                          const EstimateOptions& opts = {}) {
  return concatenated_report(acts, map_indices, opts).dimension;
}

inline std::size_t concatenated_dimension(const LayerActivations& acts,
                                          std::span<const std::size_t> map_indices, double theta) {
  return concatenated_dimension(acts, map_indices, EstimateOptions{.theta = theta});
}

/// Concatenated dimension over every map of the layer.
inline std::size_t original_dimension(const LayerActivations& acts, const EstimateOptions& opts = {}) {
  const auto all = detail::all_maps(acts);
  return concatenated_dimension(acts, all, opts);
}

inline std::size_t original_dimension(const LayerActivations& acts, double theta) {
  return original_dimension(acts, EstimateOptions{.theta = theta});
}

struct SummaryRequest {
  EstimateOptions estimate;
  bool concatenated = false;
  bool original = false;
  bool spectra = false;
};

/// Estimated dimension plus whichever of concatenated/original and log
/// spectra are requested, in one pass.
inline DimensionSummary summarize_layer(const LayerActivations& acts,
                                        std::span<const std::size_t> map_indices,
                                        const SummaryRequest& req) {
  detail::check_distinct(acts, map_indices);
  if (!(req.estimate.theta > 1.0))
    throw InvalidInput("theta must be greater than 1");

  const std::size_t k = map_indices.size();
  std::vector<DropReport> per_map(k);
  parallel_for(k, req.estimate.workers, [&](std::size_t i) {
    per_map[i] = detect_drop(
        detail::spectrum_of(feature_map_matrix(acts, map_indices[i]), req.estimate.center),
        req.estimate.theta);
  });

  DimensionSummary out;
  out.layer_name = acts.name();
  out.map_indices.assign(map_indices.begin(), map_indices.end());
  out.theta = req.estimate.theta;
  out.cluster_size = acts.cluster_size();
  for (std::size_t i = 0; i < k; ++i) {
    out.per_map_dimensions.push_back(per_map[i].dimension);
    out.estimated += per_map[i].dimension;
    if (req.spectra)
      out.spectra.push_back({"map:" + std::to_string(map_indices[i]), per_map[i].log_values});
  }

  std::optional<DropReport> concat;
  if (req.concatenated) {
    // A single map is its own concatenation.
    concat = k == 1 ? per_map.front() : concatenated_report(acts, map_indices, req.estimate);
    out.concatenated = concat->dimension;
    if (req.spectra && k > 1)
      out.spectra.push_back({"concatenated", concat->log_values});
  }
  if (req.original) {
    const bool same_as_concat = concat && k == acts.channels();
    const bool same_as_single = acts.channels() == 1;
    DropReport full = same_as_concat ? *concat
                      : same_as_single ? per_map.front()
                                       : concatenated_report(acts, detail::all_maps(acts), req.estimate);
    out.original = full.dimension;
    if (req.spectra && acts.channels() > 1 && !same_as_concat)
      out.spectra.push_back({"original", full.log_values});
  }
  return out;
}

} // namespace deepdim
