#pragma once

#include <stdexcept>
#include <string>

namespace mgh {

// Failure classes surfaced at the process and C API boundaries.
enum class ErrorKind {
  internal,
  config,
  file,
  transport,
  validation,
  format,
  numeric,
  contract,
  shape,
  degenerate,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error(ErrorKind::config, m) {}
};

class FileError : public Error {
 public:
  FileError(const std::string& path, const std::string& what)
      : Error(ErrorKind::file, what + ": " + path), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& m) : Error(ErrorKind::transport, m) {}
};

// A generated or stored record broke a schema rule. `violation` is a stable
// machine-readable code ("negative_count", "level_order", ...).
class ValidationError : public Error {
 public:
  ValidationError(std::string violation, const std::string& detail)
      : Error(ErrorKind::validation, violation + ": " + detail),
        violation_(std::move(violation)) {}
  const std::string& violation() const { return violation_; }

 private:
  std::string violation_;
};

// Malformed binary container; `field` names the header field that failed.
class FormatError : public Error {
 public:
  FormatError(std::string field, const std::string& detail)
      : Error(ErrorKind::format, "checkpoint field '" + field + "': " + detail),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& m) : Error(ErrorKind::numeric, m) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& m) : Error(ErrorKind::contract, m) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& m) : Error(ErrorKind::shape, m) {}
};

class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& m)
      : Error(ErrorKind::degenerate, m) {}
};

}  // namespace mgh
