#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mumonoids/value.hpp"

namespace mumonoids {

// Pattern: a variable or a constructor applied to sub-patterns. Variables
// must be pairwise distinct; ctor() rejects repeats with a type error.
class Pattern {
 public:
  static Pattern var(std::string name);
  static Pattern ctor(std::string name, std::vector<Pattern> subs);
  static Pattern tuple(std::vector<Pattern> subs) { return ctor(std::string(kTupleCtor), std::move(subs)); }

  bool is_var() const { return is_var_; }
  const std::string& name() const { return name_; }
  const std::vector<Pattern>& subs() const { return subs_; }
  std::vector<std::string> variables() const;
  bool binds(std::string_view v) const;

  friend bool operator==(const Pattern& a, const Pattern& b);

 private:
  Pattern() = default;
  bool is_var_ = true;
  std::string name_;
  std::vector<Pattern> subs_;
};

using Binding = std::pair<std::string, Value>;
// nullopt is the failed match ⊥.
using Bindings = std::optional<std::vector<Binding>>;

Bindings pattern_match(const Value& v, const Pattern& p);

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class AggregatorKind { Identity, Distinct, ReduceByKey, Filter };

// Syntactic reference to an aggregation function δ as written in a program.
struct AggregatorSpec {
  AggregatorKind kind = AggregatorKind::Distinct;
  std::string op;               // ReduceByKey: "min" or "max"
  std::optional<Pattern> pattern;  // Filter
  std::string var;              // Filter
  ExprPtr predicate;            // Filter: boolean expression over var

  static AggregatorSpec identity() { return {AggregatorKind::Identity, {}, {}, {}, {}}; }
  static AggregatorSpec distinct() { return {AggregatorKind::Distinct, {}, {}, {}, {}}; }
  static AggregatorSpec by_key(std::string op) { return {AggregatorKind::ReduceByKey, std::move(op), {}, {}, {}}; }
  static AggregatorSpec filter(Pattern p, std::string var, ExprPtr pred) {
    return {AggregatorKind::Filter, {}, std::move(p), std::move(var), std::move(pred)};
  }
  std::string name() const;
};

struct LambdaCase {
  Pattern pattern;
  ExprPtr body;
};

namespace node {
struct Const { Value value; };
struct Var { std::string name; };
struct Singleton { ExprPtr elem; };
struct Lambda { std::vector<LambdaCase> cases; };
struct Apply { ExprPtr fn, arg; };
struct Construct { std::string name; std::vector<ExprPtr> args; };
struct Flatmap { ExprPtr fn, src; };
struct Reduce { ExprPtr op, zero, src; };
struct ReduceByKey { ExprPtr op, src; };
struct Cogroup { ExprPtr left, right; };
struct Join { ExprPtr left, right; };
// label names the fixpoint for compatibility annotations; it is metadata and
// does not take part in structural equality.
struct Fixpoint { AggregatorSpec delta; ExprPtr seed, phi; std::string label; };
struct Let { std::string name; ExprPtr bound, body; };
struct Aggregate { AggregatorSpec delta; ExprPtr src; };
struct Dist { ExprPtr src; };
}  // namespace node

class Expr {
 public:
  using Node = std::variant<node::Const, node::Var, node::Singleton, node::Lambda, node::Apply, node::Construct,
                            node::Flatmap, node::Reduce, node::ReduceByKey, node::Cogroup, node::Join,
                            node::Fixpoint, node::Let, node::Aggregate, node::Dist>;

  explicit Expr(Node n) : node_(std::move(n)) {}
  const Node& node() const { return node_; }

  template <class T>
  const T* as() const { return std::get_if<T>(&node_); }
  template <class T>
  bool is() const { return std::holds_alternative<T>(node_); }

 private:
  Node node_;
};

namespace ex {
ExprPtr constant(Value v);
ExprPtr integer(std::int64_t v);
ExprPtr string(std::string s);
ExprPtr builtin(std::string_view name);
ExprPtr empty_bag();
ExprPtr var(std::string name);
ExprPtr singleton(ExprPtr e);
ExprPtr lambda(std::vector<LambdaCase> cases);
ExprPtr lambda(Pattern p, ExprPtr body);
ExprPtr apply(ExprPtr f, ExprPtr a);
ExprPtr apply2(ExprPtr f, ExprPtr a, ExprPtr b);
ExprPtr call(std::string_view builtin_name, ExprPtr a, ExprPtr b);
ExprPtr construct(std::string name, std::vector<ExprPtr> args);
ExprPtr tuple(std::vector<ExprPtr> args);
ExprPtr boolean(bool b);
ExprPtr if_then_else(ExprPtr c, ExprPtr then_branch, ExprPtr else_branch);
ExprPtr flatmap(ExprPtr f, ExprPtr src);
ExprPtr reduce(ExprPtr op, ExprPtr zero, ExprPtr src);
ExprPtr reduce_by_key(ExprPtr op, ExprPtr src);
ExprPtr cogroup(ExprPtr a, ExprPtr b);
ExprPtr join(ExprPtr a, ExprPtr b);
ExprPtr fixpoint(AggregatorSpec delta, ExprPtr seed, ExprPtr phi, std::string label = {});
ExprPtr let(std::string name, ExprPtr bound, ExprPtr body);
ExprPtr aggregate(AggregatorSpec delta, ExprPtr src);
ExprPtr dist(ExprPtr src);
// Expression denoting the same value a pattern matches (variables become Vars).
ExprPtr from_pattern(const Pattern& p);
}  // namespace ex

bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const AggregatorSpec& a, const AggregatorSpec& b);
std::set<std::string> free_variables(const Expr& e);
bool occurs_free(const Expr& e, std::string_view name);

// Recognises the if/then/else encoding Apply(λ True→a | False→b, c).
struct IfParts {
  ExprPtr cond, then_branch, else_branch;
};
std::optional<IfParts> as_if(const Expr& e);
bool is_empty_bag_literal(const Expr& e);

}  // namespace mumonoids
