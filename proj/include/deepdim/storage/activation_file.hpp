#pragma once

// ACTV: binary activation tensor, all integers little-endian.
//
//   offset  size  field
//   0       4     magic "ACTV"
//   4       2     format version (u16) = 1
//   6       1     dtype (u8): 1 = float32, 2 = float64
//   7       1     rank (u8) = 4
//   8       32    dims, four u64: n, C, H, W
//   40      2     layer name length L (u16)
//   42      L     layer name, UTF-8, no terminator
//   42+L    ...   n*C*H*W values of the dtype, IEEE-754 little-endian,
//                 ordered sample, channel, row, column (last fastest)
//
// Nothing may follow the payload.

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "deepdim/activations.hpp"
#include "deepdim/storage/binary_io.hpp"
#include "deepdim/storage/format_error.hpp"

namespace deepdim {

enum class ActivationDtype : std::uint8_t { float32 = 1, float64 = 2 };

inline constexpr std::array<std::uint8_t, 4> actv_magic{'A', 'C', 'T', 'V'};
inline constexpr std::uint16_t actv_version = 1;
inline constexpr std::size_t actv_max_header_size = 42 + 65535;

struct ActivationHeader {
  ActivationDtype dtype = ActivationDtype::float32;
  std::uint64_t n = 0;
  std::uint64_t channels = 0;
  std::uint64_t height = 0;
  std::uint64_t width = 0;
  std::string layer_name;
  std::size_t payload_offset = 0;

  std::uint64_t value_count() const noexcept { return n * channels * height * width; }
  std::size_t dtype_size() const noexcept { return dtype == ActivationDtype::float32 ? 4 : 8; }
};

/// Serializes `acts`. float32 output rounds each value to nearest; that is the
/// only lossy step and is opt-out via float64.
inline std::vector<std::uint8_t> encode_activations(const LayerActivations& acts,
                                                    ActivationDtype dtype = ActivationDtype::float32) {
  if (acts.name().size() > std::numeric_limits<std::uint16_t>::max())
    throw InvalidInput("layer name too long for ACTV header");
  io::ByteWriter w;
  const std::size_t vsize = dtype == ActivationDtype::float32 ? 4 : 8;
  w.reserve(42 + acts.name().size() + acts.data().size() * vsize);
  w.put_bytes(actv_magic);
  w.put<std::uint16_t>(actv_version);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(dtype));
  w.put<std::uint8_t>(4);
  w.put<std::uint64_t>(acts.cluster_size());
  w.put<std::uint64_t>(acts.channels());
  w.put<std::uint64_t>(acts.height());
  w.put<std::uint64_t>(acts.width());
  w.put<std::uint16_t>(static_cast<std::uint16_t>(acts.name().size()));
  w.put_bytes({reinterpret_cast<const std::uint8_t*>(acts.name().data()), acts.name().size()});
  for (double v : acts.data()) {
    if (dtype == ActivationDtype::float32)
      w.put(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    else
      w.put(std::bit_cast<std::uint64_t>(v));
  }
  return std::move(w).take();
}

inline ActivationHeader decode_activation_header(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  std::span<const std::uint8_t> magic;
  if (!r.get_bytes(4, magic) || !std::equal(magic.begin(), magic.end(), actv_magic.begin()))
    throw FormatError(FormatErrorKind::bad_magic, "not an ACTV file");

  ActivationHeader h;
  std::uint16_t version = 0;
  std::uint8_t dtype = 0;
  std::uint8_t rank = 0;
  if (!r.get(version))
    throw FormatError(FormatErrorKind::malformed_header, "header ends before version");
  if (version != actv_version)
    throw FormatError(FormatErrorKind::version_mismatch,
                      "ACTV version " + std::to_string(version) + ", expected " + std::to_string(actv_version));
  if (!r.get(dtype))
    throw FormatError(FormatErrorKind::malformed_header, "header ends before dtype");
  if (dtype != 1 && dtype != 2)
    throw FormatError(FormatErrorKind::unknown_dtype, "dtype code " + std::to_string(dtype));
  h.dtype = static_cast<ActivationDtype>(dtype);
  if (!r.get(rank) || rank != 4)
    throw FormatError(FormatErrorKind::malformed_header, "rank must be 4");
  if (!r.get(h.n) || !r.get(h.channels) || !r.get(h.height) || !r.get(h.width))
    throw FormatError(FormatErrorKind::malformed_header, "header ends inside dims");
  if (h.n == 0 || h.channels == 0 || h.height == 0 || h.width == 0)
    throw FormatError(FormatErrorKind::malformed_header, "zero dimension");
  std::uint16_t name_len = 0;
  std::span<const std::uint8_t> name;
  if (!r.get(name_len) || !r.get_bytes(name_len, name))
    throw FormatError(FormatErrorKind::malformed_header, "header ends inside layer name");
  h.layer_name.assign(name.begin(), name.end());
  h.payload_offset = bytes.size() - r.remaining();

  const auto max = std::numeric_limits<std::uint64_t>::max();
  if (h.n > max / h.channels || h.n * h.channels > max / h.height ||
      h.n * h.channels * h.height > max / h.width || h.value_count() > max / h.dtype_size())
    throw FormatError(FormatErrorKind::malformed_header, "dims overflow");
  return h;
}

inline LayerActivations decode_activations(std::span<const std::uint8_t> bytes) {
  const ActivationHeader h = decode_activation_header(bytes);
  const std::uint64_t need = h.value_count() * h.dtype_size();
  const std::uint64_t have = bytes.size() - h.payload_offset;
  if (have < need)
    throw FormatError(FormatErrorKind::truncated_payload,
                      "payload has " + std::to_string(have) + " bytes, expected " + std::to_string(need));
  if (have > need)
    throw FormatError(FormatErrorKind::trailing_data,
                      std::to_string(have - need) + " bytes after the payload");

  io::ByteReader r(bytes.subspan(h.payload_offset));
  std::vector<double> data(static_cast<std::size_t>(h.value_count()));
  for (double& v : data) {
    if (h.dtype == ActivationDtype::float32) {
      std::uint32_t bits = 0;
      r.get(bits);
      v = std::bit_cast<float>(bits);
    } else {
      std::uint64_t bits = 0;
      r.get(bits);
      v = std::bit_cast<double>(bits);
    }
  }
  return LayerActivations(h.layer_name, h.height, h.width, h.channels, h.n, std::move(data));
}

inline void write_activations(const LayerActivations& acts, const std::filesystem::path& path,
                              ActivationDtype dtype = ActivationDtype::float32) {
  io::write_file(path, encode_activations(acts, dtype));
}

inline LayerActivations read_activations(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  try {
    return decode_activations(bytes);
  } catch (const FormatError& e) {
    throw FormatError(e.kind(), path.string() + ": " + e.detail());
  }
}

} // namespace deepdim
