#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cope {

/// Broad failure classes; the CLI maps each to its exit code.
enum class ErrorKind { config, data, backend, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::vector<std::string> details = {})
      : std::runtime_error(what), kind_(kind), details_(std::move(details)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorKind kind_;
  std::vector<std::string> details_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::vector<std::string> details = {})
      : Error(ErrorKind::config, what, std::move(details)) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what, std::vector<std::string> details = {})
      : Error(ErrorKind::data, what, std::move(details)) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace cope
