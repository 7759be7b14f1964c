#pragma once

#include <string>
#include <string_view>

#include "deepdim/error.hpp"

namespace deepdim {

enum class FormatErrorKind {
  bad_magic,
  version_mismatch,
  unknown_dtype,
  malformed_header,
  truncated_payload,
  trailing_data,
  unsupported_format,
};

inline std::string_view to_string(FormatErrorKind k) {
  switch (k) {
  case FormatErrorKind::bad_magic:
    return "bad magic";
  case FormatErrorKind::version_mismatch:
    return "version mismatch";
  case FormatErrorKind::unknown_dtype:
    return "unknown dtype";
  case FormatErrorKind::malformed_header:
    return "malformed header";
  case FormatErrorKind::truncated_payload:
    return "truncated payload";
  case FormatErrorKind::trailing_data:
    return "trailing data";
  case FormatErrorKind::unsupported_format:
    return "unsupported format";
  }
  return "format error";
}

/// A file that does not follow its documented layout.
class FormatError : public Error {
public:
  FormatError(FormatErrorKind kind, const std::string& detail)
      : Error(std::string(to_string(kind)) + ": " + detail), kind_(kind), detail_(detail) {}

  FormatErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

private:
  FormatErrorKind kind_;
  std::string detail_;
};

} // namespace deepdim
