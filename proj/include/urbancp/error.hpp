#pragma once

#include <stdexcept>
#include <string>

namespace urbancp {

/// Base class for all errors raised by the library. `kind()` is a short
/// machine-parsable class name, surfaced verbatim by the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// A precondition on an argument was violated (shape mismatch, bad range...).
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error("input", what) {}
};

/// Reading or writing a file failed, or the file content is malformed.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

/// No fiber of the tensor has enough complete templates for entropy ranking.
class NoRegularSeriesError : public Error {
 public:
  explicit NoRegularSeriesError(const std::string& what)
      : Error("no_regular_series", what) {}
};

/// The mask marks every entry as missing.
class NothingObservedError : public Error {
 public:
  explicit NothingObservedError(const std::string& what)
      : Error("nothing_observed", what) {}
};

namespace detail {
inline void require(bool cond, const std::string& what) {
  if (!cond) throw InputError(what);
}
}  // namespace detail

}  // namespace urbancp
