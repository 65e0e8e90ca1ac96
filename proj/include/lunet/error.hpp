// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace lunet {

/// Base class of every error raised by the library. `exit_code()` is the
/// process status the command-line tool reports for it.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
  virtual int exit_code() const { return 1; }
};

/// Shape or argument contract violated by a caller.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
};

class DataError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

/// A NaN/Inf appeared, or an operation would have produced one.
class NumericError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 4; }
};

class FormatError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

} // namespace lunet
