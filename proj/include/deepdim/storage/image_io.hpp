#pragma once

// Binary PPM (P6, maxval 255) reader and writer. Samples map to [0, 1] as
// value / 255; writing rounds to nearest.

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "deepdim/image.hpp"
#include "deepdim/storage/binary_io.hpp"
#include "deepdim/storage/format_error.hpp"

namespace deepdim {

namespace detail {

class PpmHeaderParser {
public:
  explicit PpmHeaderParser(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t number(const char* what) {
    skip_space_and_comments();
    std::size_t v = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (++digits > 9)
        throw FormatError(FormatErrorKind::malformed_header, std::string("PPM ") + what + " too large");
    }
    if (digits == 0)
      throw FormatError(FormatErrorKind::malformed_header, std::string("PPM header missing ") + what);
    return v;
  }

  /// Exactly one whitespace byte separates maxval from the raster.
  void single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      throw FormatError(FormatErrorKind::malformed_header, "PPM maxval not followed by whitespace");
    ++pos_;
  }

  std::size_t position() const noexcept { return pos_; }

private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n')
          ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

} // namespace detail

inline Image decode_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P')
    throw FormatError(FormatErrorKind::unsupported_format, "not a PPM file");
  if (bytes[1] != '6')
    throw FormatError(FormatErrorKind::unsupported_format,
                      std::string("only binary PPM (P6) is supported, got P") + static_cast<char>(bytes[1]));
  detail::PpmHeaderParser p(bytes);
  const std::size_t width = p.number("width");
  const std::size_t height = p.number("height");
  const std::size_t maxval = p.number("maxval");
  p.single_space();
  if (width == 0 || height == 0)
    throw FormatError(FormatErrorKind::malformed_header, "PPM with zero size");
  if (maxval != 255)
    throw FormatError(FormatErrorKind::unsupported_format,
                      "PPM maxval " + std::to_string(maxval) + " (only 255 is supported)");

  const std::size_t need = width * height * 3;
  const std::size_t have = bytes.size() - p.position();
  if (have < need)
    throw FormatError(FormatErrorKind::truncated_payload,
                      "PPM raster has " + std::to_string(have) + " bytes, expected " + std::to_string(need));
  std::vector<float> px(need);
  for (std::size_t i = 0; i < need; ++i)
    px[i] = static_cast<float>(bytes[p.position() + i]) / 255.0f;
  return Image(height, width, std::move(px));
}

inline std::vector<std::uint8_t> encode_ppm(const Image& img) {
  const std::string header =
      "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + img.pixels().size());
  for (float v : img.pixels())
    out.push_back(static_cast<std::uint8_t>(std::lround(static_cast<double>(v) * 255.0)));
  return out;
}

inline Image read_image(const std::filesystem::path& path) {
  try {
    return decode_ppm(io::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(e.kind(), path.string() + ": " + e.detail());
  }
}

inline void write_image(const Image& img, const std::filesystem::path& path) {
  io::write_file(path, encode_ppm(img));
}

} // namespace deepdim
