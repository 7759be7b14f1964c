#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "deepdim/error.hpp"

namespace deepdim {

/// RGB image with pixel values in [0, 1], stored row-major and interleaved
/// (row, col, channel).
class Image {
public:
  static constexpr std::size_t channels = 3;

  Image(std::size_t height, std::size_t width, float fill = 0.0f)
      : Image(height, width, std::vector<float>(height * width * channels, fill)) {}

  Image(std::size_t height, std::size_t width, std::vector<float> pixels)
      : height_(height), width_(width), pixels_(std::move(pixels)) {
    if (height == 0 || width == 0)
      throw InvalidInput("image dimensions must be positive");
    if (pixels_.size() != height * width * channels)
      throw InvalidInput("image pixel count does not match " + std::to_string(height) + "x" +
                         std::to_string(width) + "x3");
    for (float v : pixels_)
      if (!(v >= 0.0f && v <= 1.0f))
        throw InvalidInput("image pixel outside [0, 1]");
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::span<const float> pixels() const noexcept { return pixels_; }

  float at(std::size_t row, std::size_t col, std::size_t ch) const {
    return pixels_[(row * width_ + col) * channels + ch];
  }

  friend bool operator==(const Image&, const Image&) = default;

private:
  std::size_t height_;
  std::size_t width_;
  std::vector<float> pixels_;
};

} // namespace deepdim
