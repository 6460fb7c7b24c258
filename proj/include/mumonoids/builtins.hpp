#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "mumonoids/types.hpp"
#include "mumonoids/value.hpp"

namespace mumonoids {

// A host function from the closed builtin set. Builtins are curried: a value
// of kind Builtin collects arguments until `arity` of them are present.
struct Builtin {
  std::string name;
  std::size_t arity;
  Value (*eval)(std::span<const Value> args);
  // Result type for a full argument list, or nullopt when the argument types
  // are not accepted.
  std::optional<TypeExpr> (*type)(std::span<const TypeExpr> args);
  bool infix;
  std::string signature;  // human-readable, for error messages
};

const Builtin* find_builtin(std::string_view name);
const Builtin& builtin(std::string_view name);
std::span<const Builtin> all_builtins();

}  // namespace mumonoids
