#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mumonoids {

enum class ErrorKind {
  Syntax,
  Type,
  MatchFailure,
  MalformedTerm,
  BuiltinType,
  IterationLimit,
  CardinalityLimit,
  InvalidArgument,
  Io,
  Internal,
};

std::string_view to_string(ErrorKind kind);

// Process exit status used by the command-line driver for each error category.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string rule, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& rule() const noexcept { return rule_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string rule_;
  std::string detail_;
};

class IterationLimitError : public Error {
 public:
  explicit IterationLimitError(std::size_t iterations);
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

[[noreturn]] void throw_type_error(std::string rule, const std::string& message);
[[noreturn]] void throw_malformed(std::string rule, const std::string& message);

}  // namespace mumonoids
