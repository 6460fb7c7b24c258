#include "mumonoids/builtins.hpp"

#include <algorithm>
#include <array>

#include "mumonoids/error.hpp"

namespace mumonoids {

namespace {

[[noreturn]] void bad_args(std::string_view name, std::span<const Value> args) {
  std::string msg = std::string(name) + " cannot be applied to";
  for (const auto& a : args) msg += " " + to_string(a);
  throw Error(ErrorKind::BuiltinType, std::string(name), msg);
}

bool both(std::span<const Value> a, ValueKind k) { return a[0].kind() == k && a[1].kind() == k; }

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

template <class IntOp, class FloatOp>
Value numeric(std::string_view name, std::span<const Value> a, IntOp iop, FloatOp fop) {
  if (both(a, ValueKind::Int)) return Value::integer(iop(a[0].as_int(), a[1].as_int()));
  if (both(a, ValueKind::Float)) return Value::floating(fop(a[0].as_float(), a[1].as_float()));
  bad_args(name, a);
}

Value eval_plus(std::span<const Value> a) {
  if (both(a, ValueKind::String)) return Value::string(a[0].as_string() + a[1].as_string());
  return numeric("+", a, wrap_add, [](double x, double y) { return x + y; });
}
Value eval_minus(std::span<const Value> a) {
  return numeric("-", a, wrap_sub, [](double x, double y) { return x - y; });
}
Value eval_times(std::span<const Value> a) {
  return numeric("*", a, wrap_mul, [](double x, double y) { return x * y; });
}
Value eval_div(std::span<const Value> a) {
  if (both(a, ValueKind::Int) && a[1].as_int() == 0) {
    throw Error(ErrorKind::BuiltinType, "/", "integer division by zero");
  }
  return numeric("/", a, [](std::int64_t x, std::int64_t y) { return x / y; },
                 [](double x, double y) { return x / y; });
}
Value eval_min(std::span<const Value> a) {
  return numeric("min", a, [](std::int64_t x, std::int64_t y) { return std::min(x, y); },
                 [](double x, double y) { return std::min(x, y); });
}
Value eval_max(std::span<const Value> a) {
  return numeric("max", a, [](std::int64_t x, std::int64_t y) { return std::max(x, y); },
                 [](double x, double y) { return std::max(x, y); });
}

template <class Cmp>
Value ordered(std::string_view name, std::span<const Value> a, Cmp cmp) {
  const bool ok = both(a, ValueKind::Int) || both(a, ValueKind::Float) || both(a, ValueKind::String);
  if (!ok) bad_args(name, a);
  return Value::boolean(cmp(compare(a[0], a[1])));
}

Value eval_lt(std::span<const Value> a) { return ordered("<", a, [](int c) { return c < 0; }); }
Value eval_le(std::span<const Value> a) { return ordered("<=", a, [](int c) { return c <= 0; }); }
Value eval_gt(std::span<const Value> a) { return ordered(">", a, [](int c) { return c > 0; }); }
Value eval_ge(std::span<const Value> a) { return ordered(">=", a, [](int c) { return c >= 0; }); }
Value eval_eq(std::span<const Value> a) { return Value::boolean(a[0] == a[1]); }
Value eval_ne(std::span<const Value> a) { return Value::boolean(a[0] != a[1]); }

bool truth(std::string_view name, std::span<const Value> all, const Value& v) {
  if (auto b = v.as_bool()) return *b;
  bad_args(name, all);
}

Value eval_and(std::span<const Value> a) { return Value::boolean(truth("and", a, a[0]) && truth("and", a, a[1])); }
Value eval_or(std::span<const Value> a) { return Value::boolean(truth("or", a, a[0]) || truth("or", a, a[1])); }
Value eval_not(std::span<const Value> a) { return Value::boolean(!truth("not", a, a[0])); }

Value eval_contains(std::span<const Value> a) {
  if (!both(a, ValueKind::String)) bad_args("contains", a);
  return Value::boolean(a[0].as_string().find(a[1].as_string()) != std::string::npos);
}

Value eval_member(std::span<const Value> a) {
  if (!a[1].is_bag()) bad_args("member", a);
  return Value::boolean(a[1].as_bag().contains(a[0]));
}

Value eval_union(std::span<const Value> a) {
  if (!both(a, ValueKind::Bag)) bad_args("++", a);
  return Value::bag(bag_union(a[0].as_bag(), a[1].as_bag()));
}

Value eval_set_union(std::span<const Value> a) {
  if (!both(a, ValueKind::Bag)) bad_args("setUnion", a);
  return Value::bag(distinct(bag_union(a[0].as_bag(), a[1].as_bag())));
}

Value eval_non_empty(std::span<const Value> a) {
  if (!a[0].is_bag()) bad_args("nonEmpty", a);
  return Value::boolean(!a[0].as_bag().empty());
}

// Total rating of a bag of records whose last field is an integer score.
std::int64_t rating(std::string_view name, std::span<const Value> all, const Bag& b) {
  std::int64_t total = 0;
  for (const auto& [v, c] : b.entries()) {
    if (v.kind() != ValueKind::Constructed || v.args().empty() || v.args().back().kind() != ValueKind::Int) {
      bad_args(name, all);
    }
    total = wrap_add(total, wrap_mul(v.args().back().as_int(), static_cast<std::int64_t>(c)));
  }
  return total;
}

Value eval_best_rated(std::span<const Value> a) {
  if (!both(a, ValueKind::Bag)) bad_args("bestRated", a);
  const auto ra = rating("bestRated", a, a[0].as_bag());
  const auto rb = rating("bestRated", a, a[1].as_bag());
  if (ra != rb) return ra > rb ? a[0] : a[1];
  // Equal ratings: the canonically larger bag wins, which keeps the operator
  // commutative and associative.
  return compare(a[0], a[1]) >= 0 ? a[0] : a[1];
}

// ---- typing ----

const TypeExpr& int_t() {
  static const TypeExpr t = TypeExpr::int_type();
  return t;
}
const TypeExpr& float_t() {
  static const TypeExpr t = TypeExpr::float_type();
  return t;
}
const TypeExpr& string_t() {
  static const TypeExpr t = TypeExpr::string_type();
  return t;
}
const TypeExpr& bool_t() {
  static const TypeExpr t = TypeExpr::boolean();
  return t;
}

bool same_basic(std::span<const TypeExpr> a, const TypeExpr& t) { return a[0] == t && a[1] == t; }

std::optional<TypeExpr> type_arith(std::span<const TypeExpr> a) {
  if (same_basic(a, int_t())) return int_t();
  if (same_basic(a, float_t())) return float_t();
  return std::nullopt;
}
std::optional<TypeExpr> type_plus(std::span<const TypeExpr> a) {
  if (same_basic(a, string_t())) return string_t();
  return type_arith(a);
}
std::optional<TypeExpr> type_compare(std::span<const TypeExpr> a) {
  if (same_basic(a, int_t()) || same_basic(a, float_t()) || same_basic(a, string_t())) return bool_t();
  return std::nullopt;
}
bool has_function(const TypeExpr& t) {
  switch (t.kind()) {
    case TypeKind::Func: return true;
    case TypeKind::Sum:
      for (const auto& c : t.cases())
        for (const auto& p : c.params)
          if (has_function(p)) return true;
      return false;
    case TypeKind::LocalBag:
    case TypeKind::DistBag: return has_function(t.elem());
    default: return false;
  }
}
// Equality is the one builtin that accepts rigid type variables.
std::optional<TypeExpr> type_equal(std::span<const TypeExpr> a) {
  if (has_function(a[0]) || has_function(a[1])) return std::nullopt;
  if (!try_sum_combine(a[0], a[1])) return std::nullopt;
  return bool_t();
}
std::optional<TypeExpr> type_logic(std::span<const TypeExpr> a) {
  for (const auto& t : a)
    if (!subtype(t, bool_t())) return std::nullopt;
  return bool_t();
}
std::optional<TypeExpr> type_contains(std::span<const TypeExpr> a) {
  if (same_basic(a, string_t())) return bool_t();
  return std::nullopt;
}
bool local_bag(const TypeExpr& t) { return t.kind() == TypeKind::LocalBag && !contains_rigid(t); }

std::optional<TypeExpr> type_member(std::span<const TypeExpr> a) {
  if (!local_bag(a[1]) || contains_rigid(a[0]) || has_function(a[0])) return std::nullopt;
  if (!try_sum_combine(a[0], a[1].elem())) return std::nullopt;
  return bool_t();
}
std::optional<TypeExpr> type_union(std::span<const TypeExpr> a) {
  if (!local_bag(a[0]) || !local_bag(a[1])) return std::nullopt;
  auto e = try_sum_combine(a[0].elem(), a[1].elem());
  if (!e) return std::nullopt;
  return TypeExpr::local_bag(*e);
}
std::optional<TypeExpr> type_non_empty(std::span<const TypeExpr> a) {
  if (!local_bag(a[0])) return std::nullopt;
  return bool_t();
}
std::optional<TypeExpr> type_best_rated(std::span<const TypeExpr> a) {
  auto t = type_union(a);
  if (!t) return std::nullopt;
  const TypeExpr& e = t->elem();
  if (e.kind() == TypeKind::Bottom) return t;
  if (e.kind() != TypeKind::Sum) return std::nullopt;
  for (const auto& c : e.cases()) {
    if (c.params.empty() || c.params.back() != int_t()) return std::nullopt;
  }
  return t;
}

const std::array<Builtin, 21>& table() {
  static const std::array<Builtin, 21> t{{
      {"+", 2, eval_plus, type_plus, true, "Int->Int->Int | Float->Float->Float | String->String->String"},
      {"-", 2, eval_minus, type_arith, true, "Int->Int->Int | Float->Float->Float"},
      {"*", 2, eval_times, type_arith, true, "Int->Int->Int | Float->Float->Float"},
      {"/", 2, eval_div, type_arith, true, "Int->Int->Int | Float->Float->Float"},
      {"<", 2, eval_lt, type_compare, true, "T->T->Bool for T in Int, Float, String"},
      {"<=", 2, eval_le, type_compare, true, "T->T->Bool for T in Int, Float, String"},
      {">", 2, eval_gt, type_compare, true, "T->T->Bool for T in Int, Float, String"},
      {">=", 2, eval_ge, type_compare, true, "T->T->Bool for T in Int, Float, String"},
      {"==", 2, eval_eq, type_equal, true, "a->a->Bool"},
      {"!=", 2, eval_ne, type_equal, true, "a->a->Bool"},
      {"and", 2, eval_and, type_logic, true, "Bool->Bool->Bool"},
      {"or", 2, eval_or, type_logic, true, "Bool->Bool->Bool"},
      {"not", 1, eval_not, type_logic, false, "Bool->Bool"},
      {"min", 2, eval_min, type_arith, false, "Int->Int->Int | Float->Float->Float"},
      {"max", 2, eval_max, type_arith, false, "Int->Int->Int | Float->Float->Float"},
      {"contains", 2, eval_contains, type_contains, false, "String->String->Bool"},
      {"member", 2, eval_member, type_member, false, "T->Bag_l<T>->Bool"},
      {"++", 2, eval_union, type_union, true, "Bag_l<T>->Bag_l<T>->Bag_l<T>"},
      {"setUnion", 2, eval_set_union, type_union, false, "Bag_l<T>->Bag_l<T>->Bag_l<T>"},
      {"nonEmpty", 1, eval_non_empty, type_non_empty, false, "Bag_l<T>->Bool"},
      {"bestRated", 2, eval_best_rated, type_best_rated, false, "Bag_l<R>->Bag_l<R>->Bag_l<R>"},
  }};
  return t;
}

}  // namespace

const Builtin* find_builtin(std::string_view name) {
  for (const auto& b : table())
    if (b.name == name) return &b;
  return nullptr;
}

const Builtin& builtin(std::string_view name) {
  if (const auto* b = find_builtin(name)) return *b;
  throw Error(ErrorKind::InvalidArgument, "builtin", "unknown builtin " + std::string(name));
}

std::span<const Builtin> all_builtins() { return table(); }

}  // namespace mumonoids
