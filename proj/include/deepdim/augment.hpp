#pragma once

// Cluster generation from a single seed image: cropping, additive Gaussian
// noise and small rotations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "deepdim/error.hpp"
#include "deepdim/image.hpp"
#include "deepdim/parallel.hpp"
#include "deepdim/random.hpp"

namespace deepdim {

enum class AugmentMethod { crop, gaussian_noise, rotation };

inline std::string_view to_string(AugmentMethod m) {
  switch (m) {
  case AugmentMethod::crop:
    return "crop";
  case AugmentMethod::gaussian_noise:
    return "gaussian_noise";
  case AugmentMethod::rotation:
    return "rotation";
  }
  return "unknown";
}

inline std::optional<AugmentMethod> parse_augment_method(std::string_view s) {
  if (s == "crop")
    return AugmentMethod::crop;
  if (s == "gaussian_noise" || s == "noise")
    return AugmentMethod::gaussian_noise;
  if (s == "rotation" || s == "rotate")
    return AugmentMethod::rotation;
  return std::nullopt;
}

struct AugmentConfig {
  AugmentMethod method = AugmentMethod::gaussian_noise;
  std::size_t crop_max_strip = 10; ///< pixels; each edge loses uniform [1, crop_max_strip]
  double noise_mean = 0.0;
  double noise_var = 0.01;
  double rotation_max_deg = 10.0;
  std::uint64_t seed = 0;

  friend bool operator==(const AugmentConfig&, const AugmentConfig&) = default;

  void validate(std::size_t height, std::size_t width) const {
    if (method == AugmentMethod::crop) {
      if (crop_max_strip < 1)
        throw InvalidInput("crop_max_strip must be at least 1 pixel");
      if (2 * crop_max_strip >= std::min(height, width))
        throw InvalidInput("crop strips of up to " + std::to_string(crop_max_strip) +
                           " px would exhaust a " + std::to_string(height) + "x" +
                           std::to_string(width) + " image");
    }
    if (!(noise_var >= 0.0) || !std::isfinite(noise_var) || !std::isfinite(noise_mean))
      throw InvalidInput("noise variance must be finite and >= 0");
    if (!(rotation_max_deg >= 0.0) || !std::isfinite(rotation_max_deg))
      throw InvalidInput("rotation_max_deg must be finite and >= 0");
  }
};

namespace detail {

/// Bilinear sample at fractional (y, x), neighbours clamped to the frame.
inline float bilinear(const Image& img, double y, double x, std::size_t ch) {
  const double ymax = static_cast<double>(img.height() - 1);
  const double xmax = static_cast<double>(img.width() - 1);
  y = std::clamp(y, 0.0, ymax);
  x = std::clamp(x, 0.0, xmax);
  const auto y0 = static_cast<std::size_t>(std::floor(y));
  const auto x0 = static_cast<std::size_t>(std::floor(x));
  const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
  const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
  const double fy = y - static_cast<double>(y0);
  const double fx = x - static_cast<double>(x0);
  if (fy == 0.0 && fx == 0.0)
    return img.at(y0, x0, ch);
  const double top = (1.0 - fx) * img.at(y0, x0, ch) + fx * img.at(y0, x1, ch);
  const double bottom = (1.0 - fx) * img.at(y1, x0, ch) + fx * img.at(y1, x1, ch);
  const double v = (1.0 - fy) * top + fy * bottom;
  return static_cast<float>(std::clamp(v, 0.0, 1.0));
}

} // namespace detail

/// Removes the given number of pixels from each edge and resamples the
/// remainder back to the original size (pixel-centre aligned bilinear).
inline Image crop_and_resize(const Image& img, std::size_t top, std::size_t bottom, std::size_t left,
                             std::size_t right) {
  const std::size_t H = img.height();
  const std::size_t W = img.width();
  if (top + bottom >= H || left + right >= W)
    throw InvalidInput("crop strips exhaust the image");
  const double ch = static_cast<double>(H - top - bottom);
  const double cw = static_cast<double>(W - left - right);
  const double sy = ch / static_cast<double>(H);
  const double sx = cw / static_cast<double>(W);

  std::vector<float> out(H * W * Image::channels);
  for (std::size_t y = 0; y < H; ++y) {
    const double src_y = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, ch - 1.0) +
                         static_cast<double>(top);
    for (std::size_t x = 0; x < W; ++x) {
      const double src_x = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, cw - 1.0) +
                           static_cast<double>(left);
      for (std::size_t c = 0; c < Image::channels; ++c)
        out[(y * W + x) * Image::channels + c] = detail::bilinear(img, src_y, src_x, c);
    }
  }
  return Image(H, W, std::move(out));
}

/// Rotation about the image centre by `degrees` (counter-clockwise on screen).
/// Pixels whose source falls outside the frame become black.
inline Image rotate_image(const Image& img, double degrees) {
  const std::size_t H = img.height();
  const std::size_t W = img.width();
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const double cy = (static_cast<double>(H) - 1.0) / 2.0;
  const double cx = (static_cast<double>(W) - 1.0) / 2.0;
  constexpr double edge_tol = 1e-9;

  std::vector<float> out(H * W * Image::channels, 0.0f);
  for (std::size_t y = 0; y < H; ++y) {
    const double dy = static_cast<double>(y) - cy;
    for (std::size_t x = 0; x < W; ++x) {
      const double dx = static_cast<double>(x) - cx;
      // Inverse rotation: where does this output pixel come from?
      const double src_x = c * dx - s * dy + cx;
      const double src_y = s * dx + c * dy + cy;
      if (src_x < -edge_tol || src_y < -edge_tol || src_x > static_cast<double>(W - 1) + edge_tol ||
          src_y > static_cast<double>(H - 1) + edge_tol)
        continue;
      for (std::size_t ch = 0; ch < Image::channels; ++ch)
        out[(y * W + x) * Image::channels + ch] = detail::bilinear(img, src_y, src_x, ch);
    }
  }
  return Image(H, W, std::move(out));
}

inline Image crop_augment(const Image& img, const AugmentConfig& cfg, Rng& rng) {
  cfg.validate(img.height(), img.width());
  std::uniform_int_distribution<std::size_t> strip(1, cfg.crop_max_strip);
  std::array<std::size_t, 4> edges{};
  for (auto& e : edges)
    e = strip(rng);
  return crop_and_resize(img, edges[0], edges[1], edges[2], edges[3]);
}

/// Adds i.i.d. N(mean, var) to every pixel of every channel, then clamps to [0, 1].
inline Image noise_augment(const Image& img, const AugmentConfig& cfg, Rng& rng) {
  cfg.validate(img.height(), img.width());
  std::vector<float> px(img.pixels().begin(), img.pixels().end());
  if (cfg.noise_var == 0.0) {
    if (cfg.noise_mean != 0.0)
      for (float& v : px)
        v = static_cast<float>(std::clamp(static_cast<double>(v) + cfg.noise_mean, 0.0, 1.0));
    return Image(img.height(), img.width(), std::move(px));
  }
  std::normal_distribution<double> gauss(cfg.noise_mean, std::sqrt(cfg.noise_var));
  for (float& v : px)
    v = static_cast<float>(std::clamp(static_cast<double>(v) + gauss(rng), 0.0, 1.0));
  return Image(img.height(), img.width(), std::move(px));
}

/// Rotation by an angle drawn uniformly from [-rotation_max_deg, +rotation_max_deg].
inline Image rotate_augment(const Image& img, const AugmentConfig& cfg, Rng& rng) {
  cfg.validate(img.height(), img.width());
  if (cfg.rotation_max_deg == 0.0)
    return img;
  std::uniform_real_distribution<double> angle(-cfg.rotation_max_deg, cfg.rotation_max_deg);
  return rotate_image(img, angle(rng));
}

inline Image augment(const Image& img, const AugmentConfig& cfg, Rng& rng) {
  switch (cfg.method) {
  case AugmentMethod::crop:
    return crop_augment(img, cfg, rng);
  case AugmentMethod::gaussian_noise:
    return noise_augment(img, cfg, rng);
  case AugmentMethod::rotation:
    return rotate_augment(img, cfg, rng);
  }
  throw InvalidInput("unknown augmentation method");
}

/// The seed image followed by n - 1 augmentations of it. Sample i draws from
/// its own sub-stream of cfg.seed, so the first m samples of a cluster of size
/// n are exactly the cluster of size m.
inline std::vector<Image> generate_cluster(const Image& img, std::size_t n, const AugmentConfig& cfg,
                                           std::size_t workers = 1) {
  if (n < 1)
    throw InvalidInput("cluster size must be at least 1");
  cfg.validate(img.height(), img.width());
  std::vector<Image> out(n, img);
  parallel_for(n - 1, workers, [&](std::size_t i) {
    Rng rng = substream(cfg.seed, i + 1);
    out[i + 1] = augment(img, cfg, rng);
  });
  return out;
}

} // namespace deepdim
