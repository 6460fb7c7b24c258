#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mumonoids {

class Expr;
class Env;
struct Builtin;
struct ValueNode;

enum class ValueKind : std::uint8_t { Int, Float, String, Builtin, Closure, Constructed, Bag };

inline constexpr std::string_view kTupleCtor = "Tuple";
inline constexpr std::string_view kTrueCtor = "True";
inline constexpr std::string_view kFalseCtor = "False";

class Bag;

// Immutable runtime datum. Copies share the underlying node.
class Value {
 public:
  Value();

  static Value integer(std::int64_t v);
  static Value floating(double v);
  static Value string(std::string v);
  static Value constructed(std::string name, std::vector<Value> args);
  static Value tuple(std::vector<Value> args);
  static Value pair(Value a, Value b);
  static Value boolean(bool b);
  static Value bag(Bag b);
  static Value builtin(const Builtin& fn, std::vector<Value> applied = {});
  static Value closure(std::shared_ptr<const Expr> lambda, std::shared_ptr<const Env> env);

  ValueKind kind() const;
  bool is_bag() const { return kind() == ValueKind::Bag; }
  bool is_function() const { return kind() == ValueKind::Builtin || kind() == ValueKind::Closure; }

  std::int64_t as_int() const;
  double as_float() const;
  const std::string& as_string() const;
  const Bag& as_bag() const;

  // Constructed values.
  const std::string& ctor_name() const;
  std::span<const Value> args() const;
  bool is_ctor(std::string_view name) const;
  bool is_ctor(std::string_view name, std::size_t arity) const;
  bool is_pair() const { return is_ctor(kTupleCtor, 2); }
  std::optional<bool> as_bool() const;

  // Function values.
  const Builtin& builtin_def() const;
  std::span<const Value> builtin_applied() const;
  const std::shared_ptr<const Expr>& closure_lambda() const;
  const std::shared_ptr<const Env>& closure_env() const;

  std::size_t hash() const;
  const ValueNode* node() const { return node_.get(); }

 private:
  explicit Value(std::shared_ptr<const ValueNode> node) : node_(std::move(node)) {}
  static Value adopt(ValueNode&& node);
  std::shared_ptr<const ValueNode> node_;
};

// Total canonical order: constants < constructed < bags.
int compare(const Value& a, const Value& b);
bool operator==(const Value& a, const Value& b);
inline bool operator!=(const Value& a, const Value& b) { return !(a == b); }
inline bool operator<(const Value& a, const Value& b) { return compare(a, b) < 0; }

struct ValueHash {
  std::size_t operator()(const Value& v) const { return v.hash(); }
};

// Multiset of values, kept sorted in canonical order with positive counts.
class Bag {
 public:
  using Entry = std::pair<Value, std::uint64_t>;

  Bag() = default;
  static Bag from_entries(std::vector<Entry> entries);
  static Bag from_values(std::vector<Value> values);
  static Bag singleton(Value v);

  std::span<const Entry> entries() const { return entries_; }
  std::uint64_t size() const { return size_; }
  std::size_t distinct_size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::uint64_t count(const Value& v) const;
  bool contains(const Value& v) const { return count(v) > 0; }

  friend bool operator==(const Bag& a, const Bag& b);
  friend bool operator!=(const Bag& a, const Bag& b) { return !(a == b); }

 private:
  std::vector<Entry> entries_;
  std::uint64_t size_ = 0;
  friend class BagBuilder;
  friend Bag bag_union(const Bag&, const Bag&);
};

// Accumulates values in any order; build() sorts and merges duplicates.
class BagBuilder {
 public:
  void add(const Value& v, std::uint64_t count = 1);
  void add_all(const Bag& b, std::uint64_t times = 1);
  std::uint64_t pending_size() const { return pending_; }
  Bag build();

 private:
  std::vector<Bag::Entry> items_;
  std::uint64_t pending_ = 0;
};

Bag bag_union(const Bag& a, const Bag& b);
Bag bag_union(std::span<const Bag> parts);
Bag distinct(const Bag& a);
// Multiset difference: multiplicity max(0, a(x) - b(x)).
Bag bag_difference(const Bag& a, const Bag& b);

int compare(const Bag& a, const Bag& b);

std::string to_string(const Value& v);
std::string to_string(const Bag& b);

// 64-bit FNV-1a; stable across runs and platforms.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 14695981039346656037ULL);
// Digest of the canonical text encoding.
std::uint64_t digest(const Bag& b);

}  // namespace mumonoids
