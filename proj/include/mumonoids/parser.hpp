#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mumonoids/aggregation.hpp"
#include "mumonoids/expr.hpp"
#include "mumonoids/types.hpp"

namespace mumonoids {

// Surface language:
//
//   program  := decl* expr
//   decl     := 'input' name ':' type ['=' "path"] ';'
//             | 'assume' 'compatible' '(' aggregator ',' label ')' ';'
//   expr     := '\' pat '->' expr ('|' pat '->' expr)*
//             | 'let' name '=' expr 'in' expr
//             | 'if' expr 'then' expr 'else' expr
//             | infix expression over application by juxtaposition
//   atom     := literal | name | Ctor['(' args ')'] | '(' expr (',' expr)* ')' | '(' op ')'
//             | '{' '}' | '{' expr (',' expr)* '}'
//             | flatmap(f, e) | reduce(op, zero, e) | reduceByKey(op, e) | groupBy(e)
//             | join(a, b) | cogroup(a, b) | fix[aggregator; label](seed, phi)
//             | aggregate[aggregator](e) | distinct(e) | dist(e)
//   aggregator := distinct | identity | minByKey | maxByKey | filter(pat, name, expr)
//
// Comments run from '#' to the end of the line. A bag literal with several
// elements that are all constants becomes a constant bag; `{e}` is always a
// singleton.

struct InputDecl {
  std::string name;
  TypeExpr type;
  std::string path;  // empty when the data is supplied by the caller
};

struct Program {
  std::vector<InputDecl> inputs;
  Annotations annotations;
  ExprPtr body;

  TypeEnv type_env() const;
};

Program parse_program(std::string_view text);
// Free lowercase names that are neither bound nor builtins parse as variables.
ExprPtr parse_expr(std::string_view text);
TypeExpr parse_type(std::string_view text);
Value parse_value(std::string_view text);
Pattern parse_pattern(std::string_view text);

std::string print_expr(const Expr& e);
inline std::string print_expr(const ExprPtr& e) { return print_expr(*e); }
std::string print_pattern(const Pattern& p);
std::string print_aggregator(const AggregatorSpec& d);
std::string print_program(const Program& p);

}  // namespace mumonoids
