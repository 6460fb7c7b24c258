#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mumonoids/expr.hpp"
#include "mumonoids/value.hpp"

namespace mumonoids {

enum class TypeKind { Basic, Sum, LocalBag, DistBag, Func, Rigid, Bottom };
enum class BagKind { Local, Distributed };

class TypeExpr;
struct TypeNode;

struct SumCase {
  std::string name;
  std::vector<TypeExpr> params;
};

// Immutable type term. Sum cases are kept sorted by constructor name, so
// structural equality is insensitive to the order the cases were written in.
// Bottom is the element type of the empty bag literal and is absorbed by
// every other type under sum_combine.
class TypeExpr {
 public:
  TypeExpr();  // Bottom

  static TypeExpr basic(std::string name);
  static TypeExpr int_type() { return basic("Int"); }
  static TypeExpr float_type() { return basic("Float"); }
  static TypeExpr string_type() { return basic("String"); }
  static TypeExpr boolean();
  static TypeExpr sum(std::vector<SumCase> cases);
  static TypeExpr constructed(std::string name, std::vector<TypeExpr> params);
  static TypeExpr tuple(std::vector<TypeExpr> params);
  static TypeExpr pair(TypeExpr a, TypeExpr b) { return tuple({std::move(a), std::move(b)}); }
  static TypeExpr bag(BagKind kind, TypeExpr elem);
  static TypeExpr local_bag(TypeExpr elem) { return bag(BagKind::Local, std::move(elem)); }
  static TypeExpr dist_bag(TypeExpr elem) { return bag(BagKind::Distributed, std::move(elem)); }
  static TypeExpr func(TypeExpr from, TypeExpr to);
  static TypeExpr rigid(int id);
  static TypeExpr bottom() { return TypeExpr(); }

  TypeKind kind() const;
  bool is_bag() const { return kind() == TypeKind::LocalBag || kind() == TypeKind::DistBag; }
  BagKind bag_kind() const;

  const std::string& basic_name() const;
  const std::vector<SumCase>& cases() const;
  const SumCase* find_case(std::string_view name) const;
  // The single case of a one-constructor sum, else nullptr.
  const SumCase* single_case() const;
  bool is_tuple(std::size_t arity) const;
  const TypeExpr& elem() const;  // bag element
  const TypeExpr& from() const;
  const TypeExpr& to() const;
  int rigid_id() const;

 private:
  explicit TypeExpr(std::shared_ptr<const TypeNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const TypeNode> node_;
  friend int compare(const TypeExpr&, const TypeExpr&);
};

int compare(const TypeExpr& a, const TypeExpr& b);
inline bool operator==(const TypeExpr& a, const TypeExpr& b) { return compare(a, b) == 0; }
inline bool operator!=(const TypeExpr& a, const TypeExpr& b) { return !(a == b); }

std::string to_string(const TypeExpr& t);

bool contains_dist_bag(const TypeExpr& t);
bool contains_rigid(const TypeExpr& t);

class TypeEnv {
 public:
  TypeEnv() = default;
  TypeEnv(std::initializer_list<std::pair<const std::string, TypeExpr>> init) : vars_(init) {}

  const TypeExpr* find(std::string_view name) const;
  void bind(const std::string& name, TypeExpr t) { vars_.insert_or_assign(name, std::move(t)); }
  const std::map<std::string, TypeExpr, std::less<>>& bindings() const { return vars_; }
  std::size_t size() const { return vars_.size(); }

  // Γ1 ∪ Γ2; throws a type error when a name is bound on both sides.
  static TypeEnv disjoint_union(const TypeEnv& a, const TypeEnv& b);
  // Γ1 + Γ2; bindings of the right operand win.
  static TypeEnv override_with(const TypeEnv& a, const TypeEnv& b);

  friend bool operator==(const TypeEnv& a, const TypeEnv& b) { return a.vars_ == b.vars_; }

 private:
  std::map<std::string, TypeExpr, std::less<>> vars_;
};

// Environment obtained by matching a pattern against a type. Throws a type
// error (rule "match") when the pattern cannot describe values of the type.
TypeEnv match_type(const Pattern& p, const TypeExpr& t);

// Restricts t to the values the pattern can match: a constructor pattern
// selects its case out of a sum, recursively. nullopt when incompatible.
std::optional<TypeExpr> narrow_to_pattern(const Pattern& p, const TypeExpr& t);

std::optional<TypeExpr> try_sum_combine(const TypeExpr& a, const TypeExpr& b);
TypeExpr sum_combine(const TypeExpr& a, const TypeExpr& b);
bool subtype(const TypeExpr& a, const TypeExpr& b);

// A node address inside an element type: at each step, the constructor whose
// parameter is entered and the parameter index.
struct PathStep {
  std::string ctor;
  std::size_t index = 0;
  friend bool operator==(const PathStep&, const PathStep&) = default;
};
using TypePath = std::vector<PathStep>;

std::string to_string(const TypePath& path);
// Path of a variable inside a pattern; throws if the variable does not occur.
TypePath pattern_path(const Pattern& p, std::string_view var);
std::optional<TypeExpr> type_at_path(const TypeExpr& t, const TypePath& path);
std::optional<Value> value_at_path(const Value& v, const TypePath& path);
// Replaces the node at path with Rigid(rigid_id). Throws InvalidArgument when
// the path does not address a node of t.
TypeExpr build_param_type(const TypeExpr& t, const TypePath& path, int rigid_id = 0);
// Every addressable node of t in preorder, root first.
std::vector<TypePath> enumerate_paths(const TypeExpr& t);

// Structural membership of a runtime value in a type.
bool inhabits(const Value& v, const TypeExpr& t);

}  // namespace mumonoids
