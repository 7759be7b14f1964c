#pragma once

#include <stdexcept>
#include <string>

namespace deepdim {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by the caller (bad shape, non-finite entry, bad config).
class InvalidInput : public Error {
public:
  using Error::Error;
};

/// Internal workspace would not fit.
class ResourceError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

/// The seed image of a cluster failed the confidence filter.
class SeedImageRejected : public Error {
public:
  SeedImageRejected(std::size_t class_index, double probability, double threshold)
      : Error("seed image rejected: P(class " + std::to_string(class_index) +
              ") = " + std::to_string(probability) + " does not exceed " +
              std::to_string(threshold)),
        probability_(probability) {}

  double probability() const noexcept { return probability_; }

private:
  double probability_;
};

} // namespace deepdim
