#pragma once

#include <stdexcept>
#include <string>

namespace hjflow {

// Invalid input to a library call (bad parameter, incompatible points, ...).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical procedure failed to reach its requested accuracy.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

// Reading or writing a file failed; the message names the path.
class IoError : public Error {
 public:
  using Error::Error;
};

// Configuration problem; carries the dotted path of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace hjflow
