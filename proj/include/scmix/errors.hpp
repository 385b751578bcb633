#pragma once

#include <stdexcept>
#include <string>

namespace scmix {

// Root of every error raised by the library. The CLI maps ConfigError,
// InvalidArgument, ShapeMismatch, InvalidLabel and FormatError to exit code 2
// and everything else to 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidLabel : public Error {
 public:
  InvalidLabel(const std::string& what, long pixel_index)
      : Error(what), pixel_index_(pixel_index) {}
  long pixel_index() const { return pixel_index_; }

 private:
  long pixel_index_;
};

// Malformed or truncated serialized data, PNG decode failures.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Configuration or validation failure; messages name the offending key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class CombinatorialLimit : public Error {
 public:
  using Error::Error;
};

// Non-finite gradients or a diverging loss.
class TrainingAborted : public Error {
 public:
  using Error::Error;
};

}  // namespace scmix
