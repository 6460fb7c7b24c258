#include "mumonoids/eval.hpp"

#include <cstdlib>
#include <set>

#include "mumonoids/aggregation.hpp"
#include "mumonoids/builtins.hpp"
#include "mumonoids/error.hpp"

namespace mumonoids {

// ---- environments ----

const Value* Env::lookup(std::string_view name) const {
  for (const Env* e = this; e; e = e->parent_.get()) {
    for (auto it = e->frame_.rbegin(); it != e->frame_.rend(); ++it) {
      if (it->first == name) return &it->second;
    }
  }
  return nullptr;
}

std::vector<Binding> Env::visible() const {
  std::vector<Binding> out;
  std::set<std::string> seen;
  for (const Env* e = this; e; e = e->parent_.get()) {
    for (auto it = e->frame_.rbegin(); it != e->frame_.rend(); ++it) {
      if (seen.insert(it->first).second) out.push_back(*it);
    }
  }
  return out;
}

EnvPtr empty_env() {
  static const EnvPtr e = std::make_shared<const Env>(std::vector<Binding>{}, nullptr);
  return e;
}

EnvPtr extend(const EnvPtr& parent, std::vector<Binding> frame) {
  if (frame.empty()) return parent;
  return std::make_shared<const Env>(std::move(frame), parent);
}

EnvPtr bind_value(const EnvPtr& parent, std::string name, Value v) {
  std::vector<Binding> frame;
  frame.emplace_back(std::move(name), std::move(v));
  return extend(parent, std::move(frame));
}

// ---- limits ----

EvalLimits EvalLimits::from_environment() {
  EvalLimits l;
  if (const char* s = std::getenv("MUMONOIDS_MAX_ITER"); s && *s) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (*end != '\0' || v == 0) {
      throw Error(ErrorKind::InvalidArgument, "limits",
                  "MUMONOIDS_MAX_ITER must be a positive integer, got '" + std::string(s) + "'");
    }
    l.max_fixpoint_iterations = static_cast<std::size_t>(v);
  }
  return l;
}

void EvalLimits::validate() const {
  if (max_fixpoint_iterations == 0 || max_bag_cardinality == 0) {
    throw Error(ErrorKind::InvalidArgument, "limits", "evaluation limits must be strictly positive");
  }
}

// ---- evaluator ----

Evaluator::Evaluator(EvalLimits limits) : limits_(limits) { limits_.validate(); }

void Evaluator::check_cardinality(std::uint64_t n, std::string_view where) const {
  if (n > limits_.max_bag_cardinality) {
    throw Error(ErrorKind::CardinalityLimit, std::string(where),
                "bag of " + std::to_string(n) + " elements exceeds the limit of " +
                    std::to_string(limits_.max_bag_cardinality));
  }
}

Value Evaluator::apply(const Value& fn, const Value& arg) {
  if (fn.kind() == ValueKind::Builtin) {
    const Builtin& def = fn.builtin_def();
    std::vector<Value> args(fn.builtin_applied().begin(), fn.builtin_applied().end());
    args.push_back(arg);
    if (args.size() == def.arity) return def.eval(args);
    return Value::builtin(def, std::move(args));
  }
  if (fn.kind() != ValueKind::Closure) {
    throw_malformed("apply", "cannot apply non-function value " + to_string(fn));
  }
  const auto* lam = fn.closure_lambda()->as<node::Lambda>();
  for (const auto& c : lam->cases) {
    if (auto b = pattern_match(arg, c.pattern)) return eval(c.body, extend(fn.closure_env(), std::move(*b)));
  }
  throw Error(ErrorKind::MatchFailure, "apply", "no lambda case matches " + to_string(arg));
}

Bag Evaluator::apply_to_bag(const Value& fn, const Value& arg) {
  Value r = apply(fn, arg);
  if (!r.is_bag()) throw_malformed("flatmap", "function returned " + to_string(r) + " instead of a bag");
  return r.as_bag();
}

Bag Evaluator::flatmap(const Value& f, const Bag& a) {
  BagBuilder out;
  for (const auto& [v, c] : a.entries()) {
    out.add_all(apply_to_bag(f, v), c);
    check_cardinality(out.pending_size(), "flatmap");
  }
  return out.build();
}

Value Evaluator::reduce(const Value& op, const Value& zero, const Bag& a) {
  Value acc = zero;
  for (const auto& [v, c] : a.entries()) {
    for (std::uint64_t i = 0; i < c; ++i) acc = apply(apply(op, acc), v);
  }
  return acc;
}

static const Value& key_of(const Value& v, std::string_view where) {
  if (!v.is_pair()) throw_malformed(std::string(where), "expected a (key, value) pair, found " + to_string(v));
  return v.args()[0];
}

Bag Evaluator::reduce_by_key(const Value& op, const Bag& a) {
  BagBuilder out;
  const auto entries = a.entries();
  std::size_t i = 0;
  while (i < entries.size()) {
    const Value& key = key_of(entries[i].first, "reduceByKey");
    Value acc = entries[i].first.args()[1];
    for (std::uint64_t k = 1; k < entries[i].second; ++k) acc = apply(apply(op, acc), entries[i].first.args()[1]);
    std::size_t j = i + 1;
    for (; j < entries.size() && key_of(entries[j].first, "reduceByKey") == key; ++j) {
      for (std::uint64_t k = 0; k < entries[j].second; ++k) acc = apply(apply(op, acc), entries[j].first.args()[1]);
    }
    out.add(Value::pair(key, acc));
    i = j;
  }
  return out.build();
}

FixpointResult Evaluator::fixpoint(const Aggregator& delta, const Bag& seed, const Value& phi) {
  Bag r = delta.apply(seed);
  Bag s = r;
  std::size_t iterations = 0;
  for (;;) {
    if (iterations == limits_.max_fixpoint_iterations) throw IterationLimitError(iterations);
    ++iterations;
    Bag produced = apply_to_bag(phi, Value::bag(r));
    Bag next = delta.apply(bag_union(s, produced));
    check_cardinality(next.size(), "fixpoint");
    if (next == s) break;
    r = delta.apply(produced);
    s = std::move(next);
  }
  log_.push_back(iterations);
  return {std::move(s), iterations};
}

Value Evaluator::eval(const ExprPtr& e, const EnvPtr& env) {
  return std::visit(
      [&](const auto& x) -> Value {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, node::Const>) {
          return x.value;
        } else if constexpr (std::is_same_v<T, node::Var>) {
          if (const Value* v = env->lookup(x.name)) return *v;
          throw_malformed("var", "unbound variable " + x.name);
        } else if constexpr (std::is_same_v<T, node::Singleton>) {
          return Value::bag(Bag::singleton(eval(x.elem, env)));
        } else if constexpr (std::is_same_v<T, node::Lambda>) {
          return Value::closure(e, env);
        } else if constexpr (std::is_same_v<T, node::Apply>) {
          Value f = eval(x.fn, env);
          return apply(f, eval(x.arg, env));
        } else if constexpr (std::is_same_v<T, node::Construct>) {
          std::vector<Value> args;
          args.reserve(x.args.size());
          for (const auto& a : x.args) args.push_back(eval(a, env));
          return Value::constructed(x.name, std::move(args));
        } else if constexpr (std::is_same_v<T, node::Flatmap>) {
          Value f = eval(x.fn, env);
          return Value::bag(flatmap(f, eval(x.src, env).as_bag()));
        } else if constexpr (std::is_same_v<T, node::Reduce>) {
          Value op = eval(x.op, env);
          Value zero = eval(x.zero, env);
          return reduce(op, zero, eval(x.src, env).as_bag());
        } else if constexpr (std::is_same_v<T, node::ReduceByKey>) {
          Value op = eval(x.op, env);
          return Value::bag(reduce_by_key(op, eval(x.src, env).as_bag()));
        } else if constexpr (std::is_same_v<T, node::Cogroup>) {
          Value l = eval(x.left, env);
          return Value::bag(eval_cogroup(l.as_bag(), eval(x.right, env).as_bag()));
        } else if constexpr (std::is_same_v<T, node::Join>) {
          Value l = eval(x.left, env);
          Bag out = eval_join(l.as_bag(), eval(x.right, env).as_bag());
          check_cardinality(out.size(), "join");
          return Value::bag(std::move(out));
        } else if constexpr (std::is_same_v<T, node::Fixpoint>) {
          const Aggregator delta = Aggregator::from_spec(x.delta, env);
          Value seed = eval(x.seed, env);
          Value phi = eval(x.phi, env);
          if (handler_) return Value::bag(handler_(FixpointCall{*e, delta, seed.as_bag(), phi}));
          return Value::bag(fixpoint(delta, seed.as_bag(), phi).result);
        } else if constexpr (std::is_same_v<T, node::Let>) {
          Value bound = eval(x.bound, env);
          return eval(x.body, bind_value(env, x.name, std::move(bound)));
        } else if constexpr (std::is_same_v<T, node::Aggregate>) {
          const Aggregator delta = Aggregator::from_spec(x.delta, env);
          return Value::bag(delta.apply(eval(x.src, env).as_bag()));
        } else {
          return eval(x.src, env);
        }
      },
      e->node());
}

// ---- free-standing kernels ----

Value eval(const EnvPtr& env, const ExprPtr& e, const EvalLimits& limits) { return Evaluator(limits).eval(e, env); }

Value apply_lambda(const Value& f, const Value& v) { return Evaluator().apply(f, v); }

Bag eval_flatmap(const Value& f, const Bag& a) { return Evaluator().flatmap(f, a); }

Value eval_reduce(const Value& op, const Value& zero, const Bag& a) { return Evaluator().reduce(op, zero, a); }

Bag eval_reduce_by_key(const Value& op, const Bag& a) { return Evaluator().reduce_by_key(op, a); }

namespace {

struct Group {
  const Value* key;
  std::size_t begin, end;
};

// Splits a bag of pairs into runs of equal keys; canonical order sorts pairs by key first.
std::vector<Group> groups(const Bag& b, std::string_view where) {
  std::vector<Group> out;
  const auto entries = b.entries();
  std::size_t i = 0;
  while (i < entries.size()) {
    const Value& k = key_of(entries[i].first, where);
    std::size_t j = i + 1;
    while (j < entries.size() && key_of(entries[j].first, where) == k) ++j;
    out.push_back(Group{&k, i, j});
    i = j;
  }
  return out;
}

}  // namespace

Bag eval_join(const Bag& a, const Bag& b) {
  const auto ga = groups(a, "join");
  const auto gb = groups(b, "join");
  const auto ea = a.entries();
  const auto eb = b.entries();
  BagBuilder out;
  std::size_t i = 0, j = 0;
  while (i < ga.size() && j < gb.size()) {
    const int c = compare(*ga[i].key, *gb[j].key);
    if (c < 0) {
      ++i;
    } else if (c > 0) {
      ++j;
    } else {
      for (std::size_t x = ga[i].begin; x < ga[i].end; ++x) {
        for (std::size_t y = gb[j].begin; y < gb[j].end; ++y) {
          out.add(Value::pair(*ga[i].key, Value::pair(ea[x].first.args()[1], eb[y].first.args()[1])),
                  ea[x].second * eb[y].second);
        }
      }
      ++i;
      ++j;
    }
  }
  return out.build();
}

Bag eval_cogroup(const Bag& a, const Bag& b) {
  const auto ga = groups(a, "cogroup");
  const auto gb = groups(b, "cogroup");
  const auto ea = a.entries();
  const auto eb = b.entries();
  auto values = [](std::span<const Bag::Entry> es, const Group& g) {
    BagBuilder vb;
    for (std::size_t x = g.begin; x < g.end; ++x) vb.add(es[x].first.args()[1], es[x].second);
    return Value::bag(vb.build());
  };
  const Value empty = Value::bag(Bag{});
  BagBuilder out;
  std::size_t i = 0, j = 0;
  while (i < ga.size() || j < gb.size()) {
    int c;
    if (i == ga.size()) c = 1;
    else if (j == gb.size()) c = -1;
    else c = compare(*ga[i].key, *gb[j].key);
    if (c < 0) {
      out.add(Value::pair(*ga[i].key, Value::pair(values(ea, ga[i]), empty)));
      ++i;
    } else if (c > 0) {
      out.add(Value::pair(*gb[j].key, Value::pair(empty, values(eb, gb[j]))));
      ++j;
    } else {
      out.add(Value::pair(*ga[i].key, Value::pair(values(ea, ga[i]), values(eb, gb[j]))));
      ++i;
      ++j;
    }
  }
  return out.build();
}

FixpointResult eval_fixpoint(const Aggregator& delta, const Bag& r, const Value& phi, const EvalLimits& limits) {
  return Evaluator(limits).fixpoint(delta, r, phi);
}

}  // namespace mumonoids
