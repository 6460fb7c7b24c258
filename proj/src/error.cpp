#include "mumonoids/error.hpp"

namespace mumonoids {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "syntax error";
    case ErrorKind::Type: return "type error";
    case ErrorKind::MatchFailure: return "match failure";
    case ErrorKind::MalformedTerm: return "malformed term";
    case ErrorKind::BuiltinType: return "builtin type error";
    case ErrorKind::IterationLimit: return "iteration limit";
    case ErrorKind::CardinalityLimit: return "cardinality limit";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::Internal: return "internal error";
  }
  return "error";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return 2;
    case ErrorKind::Type: return 3;
    case ErrorKind::MatchFailure:
    case ErrorKind::MalformedTerm:
    case ErrorKind::BuiltinType: return 4;
    case ErrorKind::IterationLimit:
    case ErrorKind::CardinalityLimit: return 5;
    case ErrorKind::InvalidArgument: return 1;
    case ErrorKind::Io: return 7;
    case ErrorKind::Internal: return 6;
  }
  return 6;
}

static std::string format_message(ErrorKind kind, const std::string& rule, const std::string& message) {
  std::string out(to_string(kind));
  if (!rule.empty()) out += " [" + rule + "]";
  out += ": ";
  out += message;
  return out;
}

Error::Error(ErrorKind kind, std::string rule, const std::string& message)
    : std::runtime_error(format_message(kind, rule, message)),
      kind_(kind),
      rule_(std::move(rule)),
      detail_(message) {}

IterationLimitError::IterationLimitError(std::size_t iterations)
    : Error(ErrorKind::IterationLimit, "fixpoint",
            "no fixpoint reached after " + std::to_string(iterations) + " iterations"),
      iterations_(iterations) {}

void throw_type_error(std::string rule, const std::string& message) {
  throw Error(ErrorKind::Type, std::move(rule), message);
}

void throw_malformed(std::string rule, const std::string& message) {
  throw Error(ErrorKind::MalformedTerm, std::move(rule), message);
}

}  // namespace mumonoids
