#pragma once

#include <stdexcept>
#include <string>

namespace relest {

/// Failure category. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kInput,      // malformed or inconsistent arguments
  kDomain,     // argument outside the mathematical domain
  kParse,      // CSV/config parse failure
  kIo,         // filesystem failure
  kNumerical,  // factorization failure, ill-conditioning, non-convergence
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::kInput, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::kDomain, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(ErrorKind::kParse, "line " + std::to_string(line) + ": " + what), line_(line) {}
  /// Same error, prefixed with the file it came from.
  ParseError(const std::string& source, const ParseError& inner)
      : Error(ErrorKind::kParse, source + ": " + inner.what()), line_(inner.line_) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(ErrorKind::kIo, path + ": " + what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::kNumerical, what) {}
};

/// Raised by trace_system when Sigma is too close to singular to invert reliably.
class IllConditionedError : public NumericalError {
 public:
  IllConditionedError(const std::string& what, double condition)
      : NumericalError(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

}  // namespace relest
