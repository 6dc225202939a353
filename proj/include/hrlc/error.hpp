#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hrlc {

// Root of every error thrown by the library. The CLI maps the subclasses
// onto its exit codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class InternalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Thrown by pca_fit when the covariance has fewer than `d` eigenvalues above
// the degeneracy threshold.
class DegenerateError : public Error {
 public:
  DegenerateError(const std::string& what, std::size_t attained_rank)
      : Error(what), rank_(attained_rank) {}

  std::size_t attained_rank() const noexcept { return rank_; }

 private:
  std::size_t rank_;
};

}  // namespace hrlc
