#include "mumonoids/value.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <functional>
#include <variant>

#include "mumonoids/builtins.hpp"
#include "mumonoids/error.hpp"

namespace mumonoids {

struct ConstructedPayload {
  std::string name;
  std::vector<Value> args;
};

struct BuiltinPayload {
  const Builtin* def;
  std::vector<Value> applied;
};

struct ClosurePayload {
  std::shared_ptr<const Expr> lambda;
  std::shared_ptr<const Env> env;
};

struct ValueNode {
  std::variant<std::int64_t, double, std::string, BuiltinPayload, ClosurePayload, ConstructedPayload, Bag>
      payload;
  std::size_t hash = 0;
};

namespace {

constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (i * 8)) & 0xffU;
    h *= kFnvPrime;
  }
  return h;
}

std::size_t compute_hash(const ValueNode& n) {
  std::uint64_t h = mix(14695981039346656037ULL, n.payload.index());
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, std::int64_t>) {
          h = mix(h, static_cast<std::uint64_t>(p));
        } else if constexpr (std::is_same_v<T, double>) {
          h = mix(h, std::bit_cast<std::uint64_t>(p));
        } else if constexpr (std::is_same_v<T, std::string>) {
          h = fnv1a(p, h);
        } else if constexpr (std::is_same_v<T, BuiltinPayload>) {
          h = fnv1a(p.def->name, h);
          for (const auto& a : p.applied) h = mix(h, a.hash());
        } else if constexpr (std::is_same_v<T, ClosurePayload>) {
          h = mix(h, reinterpret_cast<std::uintptr_t>(p.lambda.get()));
          h = mix(h, reinterpret_cast<std::uintptr_t>(p.env.get()));
        } else if constexpr (std::is_same_v<T, ConstructedPayload>) {
          h = fnv1a(p.name, h);
          for (const auto& a : p.args) h = mix(h, a.hash());
        } else {
          for (const auto& [v, c] : p.entries()) h = mix(mix(h, v.hash()), c);
        }
      },
      n.payload);
  return static_cast<std::size_t>(h);
}

const std::shared_ptr<const ValueNode>& zero_node() {
  static const std::shared_ptr<const ValueNode> node = [] {
    auto n = std::make_shared<ValueNode>();
    n->payload = std::int64_t{0};
    n->hash = compute_hash(*n);
    return std::shared_ptr<const ValueNode>(std::move(n));
  }();
  return node;
}

template <class T>
int three_way(const T& a, const T& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

int compare_floats(double a, double b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return three_way(std::bit_cast<std::uint64_t>(a), std::bit_cast<std::uint64_t>(b));
}

int compare_lists(std::span<const Value> a, std::span<const Value> b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(a[i], b[i]); c != 0) return c;
  }
  return three_way(a.size(), b.size());
}

void append_float(std::string& out, double d) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, d);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
  out += s;
}

void append_quoted(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
}

void append_value(std::string& out, const Value& v);

void append_bag(std::string& out, const Bag& b) {
  out += '{';
  bool first = true;
  for (const auto& [v, c] : b.entries()) {
    for (std::uint64_t i = 0; i < c; ++i) {
      if (!first) out += ", ";
      first = false;
      append_value(out, v);
    }
  }
  out += '}';
}

void append_value(std::string& out, const Value& v) {
  switch (v.kind()) {
    case ValueKind::Int: out += std::to_string(v.as_int()); break;
    case ValueKind::Float: append_float(out, v.as_float()); break;
    case ValueKind::String: append_quoted(out, v.as_string()); break;
    case ValueKind::Builtin: {
      if (v.builtin_applied().empty()) {
        out += "<builtin " + v.builtin_def().name + ">";
      } else {
        out += "<builtin " + v.builtin_def().name;
        for (const auto& a : v.builtin_applied()) {
          out += ' ';
          append_value(out, a);
        }
        out += '>';
      }
      break;
    }
    case ValueKind::Closure: out += "<closure>"; break;
    case ValueKind::Constructed: {
      out += v.ctor_name();
      const auto args = v.args();
      if (!args.empty() || (v.ctor_name() != kTrueCtor && v.ctor_name() != kFalseCtor)) {
        out += '(';
        for (std::size_t i = 0; i < args.size(); ++i) {
          if (i) out += ',';
          append_value(out, args[i]);
        }
        out += ')';
      }
      break;
    }
    case ValueKind::Bag: append_bag(out, v.as_bag()); break;
  }
}

}  // namespace

Value::Value() : node_(zero_node()) {}

Value Value::adopt(ValueNode&& node) {
  auto n = std::make_shared<ValueNode>(std::move(node));
  n->hash = compute_hash(*n);
  return Value(std::shared_ptr<const ValueNode>(std::move(n)));
}

Value Value::integer(std::int64_t v) { return adopt(ValueNode{v}); }
Value Value::floating(double v) { return adopt(ValueNode{v}); }
Value Value::string(std::string v) { return adopt(ValueNode{std::move(v)}); }
Value Value::constructed(std::string name, std::vector<Value> args) {
  return adopt(ValueNode{ConstructedPayload{std::move(name), std::move(args)}});
}
Value Value::tuple(std::vector<Value> args) { return constructed(std::string(kTupleCtor), std::move(args)); }
Value Value::pair(Value a, Value b) { return tuple({std::move(a), std::move(b)}); }
Value Value::boolean(bool b) {
  static const Value t = constructed(std::string(kTrueCtor), {});
  static const Value f = constructed(std::string(kFalseCtor), {});
  return b ? t : f;
}
Value Value::bag(Bag b) { return adopt(ValueNode{std::move(b)}); }
Value Value::builtin(const Builtin& fn, std::vector<Value> applied) {
  return adopt(ValueNode{BuiltinPayload{&fn, std::move(applied)}});
}
Value Value::closure(std::shared_ptr<const Expr> lambda, std::shared_ptr<const Env> env) {
  return adopt(ValueNode{ClosurePayload{std::move(lambda), std::move(env)}});
}

ValueKind Value::kind() const { return static_cast<ValueKind>(node_->payload.index()); }

static std::string kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::Int: return "Int";
    case ValueKind::Float: return "Float";
    case ValueKind::String: return "String";
    case ValueKind::Builtin: return "builtin function";
    case ValueKind::Closure: return "closure";
    case ValueKind::Constructed: return "constructed value";
    case ValueKind::Bag: return "bag";
  }
  return "value";
}

template <class T>
static const T& payload_as(const ValueNode& n, ValueKind expected) {
  if (const T* p = std::get_if<T>(&n.payload)) return *p;
  throw Error(ErrorKind::MalformedTerm, "value",
              "expected " + kind_name(expected) + ", found " +
                  kind_name(static_cast<ValueKind>(n.payload.index())));
}

std::int64_t Value::as_int() const { return payload_as<std::int64_t>(*node_, ValueKind::Int); }
double Value::as_float() const { return payload_as<double>(*node_, ValueKind::Float); }
const std::string& Value::as_string() const { return payload_as<std::string>(*node_, ValueKind::String); }
const Bag& Value::as_bag() const { return payload_as<Bag>(*node_, ValueKind::Bag); }
const std::string& Value::ctor_name() const {
  return payload_as<ConstructedPayload>(*node_, ValueKind::Constructed).name;
}
std::span<const Value> Value::args() const {
  return payload_as<ConstructedPayload>(*node_, ValueKind::Constructed).args;
}
bool Value::is_ctor(std::string_view name) const {
  const auto* p = std::get_if<ConstructedPayload>(&node_->payload);
  return p && p->name == name;
}
bool Value::is_ctor(std::string_view name, std::size_t arity) const {
  const auto* p = std::get_if<ConstructedPayload>(&node_->payload);
  return p && p->name == name && p->args.size() == arity;
}
std::optional<bool> Value::as_bool() const {
  if (is_ctor(kTrueCtor, 0)) return true;
  if (is_ctor(kFalseCtor, 0)) return false;
  return std::nullopt;
}
const Builtin& Value::builtin_def() const {
  return *payload_as<BuiltinPayload>(*node_, ValueKind::Builtin).def;
}
std::span<const Value> Value::builtin_applied() const {
  return payload_as<BuiltinPayload>(*node_, ValueKind::Builtin).applied;
}
const std::shared_ptr<const Expr>& Value::closure_lambda() const {
  return payload_as<ClosurePayload>(*node_, ValueKind::Closure).lambda;
}
const std::shared_ptr<const Env>& Value::closure_env() const {
  return payload_as<ClosurePayload>(*node_, ValueKind::Closure).env;
}
std::size_t Value::hash() const { return node_->hash; }

int compare(const Value& a, const Value& b) {
  if (a.node() == b.node()) return 0;
  const auto ka = a.kind();
  const auto kb = b.kind();
  if (ka != kb) return ka < kb ? -1 : 1;
  switch (ka) {
    case ValueKind::Int: return three_way(a.as_int(), b.as_int());
    case ValueKind::Float: return compare_floats(a.as_float(), b.as_float());
    case ValueKind::String: return three_way(a.as_string(), b.as_string());
    case ValueKind::Builtin: {
      if (int c = three_way(a.builtin_def().name, b.builtin_def().name); c != 0) return c;
      return compare_lists(a.builtin_applied(), b.builtin_applied());
    }
    case ValueKind::Closure: {
      std::less<const void*> lt;
      const void* la = a.closure_lambda().get();
      const void* lb = b.closure_lambda().get();
      if (la != lb) return lt(la, lb) ? -1 : 1;
      const void* ea = a.closure_env().get();
      const void* eb = b.closure_env().get();
      if (ea != eb) return lt(ea, eb) ? -1 : 1;
      return 0;
    }
    case ValueKind::Constructed: {
      if (int c = three_way(a.ctor_name(), b.ctor_name()); c != 0) return c;
      return compare_lists(a.args(), b.args());
    }
    case ValueKind::Bag: return compare(a.as_bag(), b.as_bag());
  }
  return 0;
}

bool operator==(const Value& a, const Value& b) {
  if (a.node() == b.node()) return true;
  if (a.hash() != b.hash()) return false;
  return compare(a, b) == 0;
}

int compare(const Bag& a, const Bag& b) {
  const auto ea = a.entries();
  const auto eb = b.entries();
  const std::size_t n = std::min(ea.size(), eb.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(ea[i].first, eb[i].first); c != 0) return c;
    // More copies of a smaller element sorts first.
    if (ea[i].second != eb[i].second) return ea[i].second > eb[i].second ? -1 : 1;
  }
  return three_way(ea.size(), eb.size());
}

// ---- Bag ----

static void normalize(std::vector<Bag::Entry>& items) {
  std::sort(items.begin(), items.end(),
            [](const Bag::Entry& x, const Bag::Entry& y) { return compare(x.first, y.first) < 0; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].second == 0) continue;
    if (out > 0 && items[out - 1].first == items[i].first) {
      items[out - 1].second += items[i].second;
    } else {
      items[out++] = std::move(items[i]);
    }
  }
  items.resize(out);
}

Bag Bag::from_entries(std::vector<Entry> entries) {
  BagBuilder b;
  for (auto& e : entries) b.add(e.first, e.second);
  return b.build();
}

Bag Bag::from_values(std::vector<Value> values) {
  BagBuilder b;
  for (auto& v : values) b.add(v);
  return b.build();
}

Bag Bag::singleton(Value v) {
  Bag b;
  b.entries_.emplace_back(std::move(v), 1);
  b.size_ = 1;
  return b;
}

std::uint64_t Bag::count(const Value& v) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), v,
                             [](const Entry& e, const Value& x) { return compare(e.first, x) < 0; });
  if (it != entries_.end() && it->first == v) return it->second;
  return 0;
}

bool operator==(const Bag& a, const Bag& b) {
  if (a.size_ != b.size_ || a.entries_.size() != b.entries_.size()) return false;
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    if (a.entries_[i].second != b.entries_[i].second) return false;
    if (a.entries_[i].first != b.entries_[i].first) return false;
  }
  return true;
}

void BagBuilder::add(const Value& v, std::uint64_t count) {
  if (count == 0) return;
  items_.emplace_back(v, count);
  pending_ += count;
}

void BagBuilder::add_all(const Bag& b, std::uint64_t times) {
  if (times == 0) return;
  for (const auto& [v, c] : b.entries()) add(v, c * times);
}

Bag BagBuilder::build() {
  normalize(items_);
  Bag out;
  out.entries_ = std::move(items_);
  out.size_ = pending_;
  items_.clear();
  pending_ = 0;
  return out;
}

Bag bag_union(const Bag& a, const Bag& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  Bag out;
  const auto ea = a.entries();
  const auto eb = b.entries();
  out.entries_.reserve(ea.size() + eb.size());
  std::size_t i = 0, j = 0;
  while (i < ea.size() && j < eb.size()) {
    const int c = compare(ea[i].first, eb[j].first);
    if (c < 0) {
      out.entries_.push_back(ea[i++]);
    } else if (c > 0) {
      out.entries_.push_back(eb[j++]);
    } else {
      out.entries_.emplace_back(ea[i].first, ea[i].second + eb[j].second);
      ++i;
      ++j;
    }
  }
  for (; i < ea.size(); ++i) out.entries_.push_back(ea[i]);
  for (; j < eb.size(); ++j) out.entries_.push_back(eb[j]);
  out.size_ = a.size() + b.size();
  return out;
}

Bag bag_union(std::span<const Bag> parts) {
  BagBuilder b;
  for (const auto& p : parts) b.add_all(p);
  return b.build();
}

Bag distinct(const Bag& a) {
  std::vector<Bag::Entry> entries;
  entries.reserve(a.distinct_size());
  for (const auto& [v, c] : a.entries()) entries.emplace_back(v, 1);
  return Bag::from_entries(std::move(entries));
}

Bag bag_difference(const Bag& a, const Bag& b) {
  BagBuilder out;
  for (const auto& [v, c] : a.entries()) {
    const std::uint64_t other = b.count(v);
    if (c > other) out.add(v, c - other);
  }
  return out.build();
}

std::string to_string(const Value& v) {
  std::string out;
  append_value(out, v);
  return out;
}

std::string to_string(const Bag& b) {
  std::string out;
  append_bag(out, b);
  return out;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t digest(const Bag& b) { return fnv1a(to_string(b)); }

}  // namespace mumonoids
