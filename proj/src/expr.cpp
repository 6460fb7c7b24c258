#include "mumonoids/expr.hpp"

#include <algorithm>

#include "mumonoids/builtins.hpp"
#include "mumonoids/error.hpp"

namespace mumonoids {

// ---- Pattern ----

Pattern Pattern::var(std::string name) {
  Pattern p;
  p.is_var_ = true;
  p.name_ = std::move(name);
  return p;
}

Pattern Pattern::ctor(std::string name, std::vector<Pattern> subs) {
  Pattern p;
  p.is_var_ = false;
  p.name_ = std::move(name);
  p.subs_ = std::move(subs);
  auto vars = p.variables();
  std::sort(vars.begin(), vars.end());
  auto dup = std::adjacent_find(vars.begin(), vars.end());
  if (dup != vars.end()) {
    throw_type_error("pattern", "variable " + *dup + " occurs more than once in a pattern");
  }
  return p;
}

static void collect_vars(const Pattern& p, std::vector<std::string>& out) {
  if (p.is_var()) {
    out.push_back(p.name());
    return;
  }
  for (const auto& s : p.subs()) collect_vars(s, out);
}

std::vector<std::string> Pattern::variables() const {
  std::vector<std::string> out;
  collect_vars(*this, out);
  return out;
}

bool Pattern::binds(std::string_view v) const {
  if (is_var_) return name_ == v;
  return std::any_of(subs_.begin(), subs_.end(), [&](const Pattern& s) { return s.binds(v); });
}

bool operator==(const Pattern& a, const Pattern& b) {
  return a.is_var_ == b.is_var_ && a.name_ == b.name_ && a.subs_ == b.subs_;
}

static bool match_into(const Value& v, const Pattern& p, std::vector<Binding>& out) {
  if (p.is_var()) {
    out.emplace_back(p.name(), v);
    return true;
  }
  if (v.kind() != ValueKind::Constructed || v.ctor_name() != p.name()) return false;
  const auto args = v.args();
  if (args.size() != p.subs().size()) {
    throw_malformed("match", "constructor " + p.name() + " has " + std::to_string(args.size()) +
                                 " arguments but the pattern expects " + std::to_string(p.subs().size()));
  }
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!match_into(args[i], p.subs()[i], out)) return false;
  }
  return true;
}

Bindings pattern_match(const Value& v, const Pattern& p) {
  std::vector<Binding> out;
  if (!match_into(v, p, out)) return std::nullopt;
  return out;
}

std::string AggregatorSpec::name() const {
  switch (kind) {
    case AggregatorKind::Identity: return "identity";
    case AggregatorKind::Distinct: return "distinct";
    case AggregatorKind::ReduceByKey: return op + "ByKey";
    case AggregatorKind::Filter: return "filter";
  }
  return "?";
}

// ---- builders ----

namespace ex {

static ExprPtr mk(Expr::Node n) { return std::make_shared<const Expr>(std::move(n)); }

ExprPtr constant(Value v) { return mk(node::Const{std::move(v)}); }
ExprPtr integer(std::int64_t v) { return constant(Value::integer(v)); }
ExprPtr string(std::string s) { return constant(Value::string(std::move(s))); }
ExprPtr builtin(std::string_view name) { return constant(Value::builtin(mumonoids::builtin(name))); }
ExprPtr empty_bag() { return constant(Value::bag(Bag{})); }
ExprPtr var(std::string name) { return mk(node::Var{std::move(name)}); }
ExprPtr singleton(ExprPtr e) { return mk(node::Singleton{std::move(e)}); }
ExprPtr lambda(std::vector<LambdaCase> cases) {
  if (cases.empty()) throw_malformed("lambda", "a lambda needs at least one case");
  return mk(node::Lambda{std::move(cases)});
}
ExprPtr lambda(Pattern p, ExprPtr body) { return lambda({LambdaCase{std::move(p), std::move(body)}}); }
ExprPtr apply(ExprPtr f, ExprPtr a) { return mk(node::Apply{std::move(f), std::move(a)}); }
ExprPtr apply2(ExprPtr f, ExprPtr a, ExprPtr b) { return apply(apply(std::move(f), std::move(a)), std::move(b)); }
ExprPtr call(std::string_view builtin_name, ExprPtr a, ExprPtr b) {
  return apply2(builtin(builtin_name), std::move(a), std::move(b));
}
ExprPtr construct(std::string name, std::vector<ExprPtr> args) {
  return mk(node::Construct{std::move(name), std::move(args)});
}
ExprPtr tuple(std::vector<ExprPtr> args) { return construct(std::string(kTupleCtor), std::move(args)); }
ExprPtr boolean(bool b) { return construct(std::string(b ? kTrueCtor : kFalseCtor), {}); }
ExprPtr if_then_else(ExprPtr c, ExprPtr then_branch, ExprPtr else_branch) {
  return apply(lambda({LambdaCase{Pattern::ctor(std::string(kTrueCtor), {}), std::move(then_branch)},
                       LambdaCase{Pattern::ctor(std::string(kFalseCtor), {}), std::move(else_branch)}}),
               std::move(c));
}
ExprPtr flatmap(ExprPtr f, ExprPtr src) { return mk(node::Flatmap{std::move(f), std::move(src)}); }
ExprPtr reduce(ExprPtr op, ExprPtr zero, ExprPtr src) {
  return mk(node::Reduce{std::move(op), std::move(zero), std::move(src)});
}
ExprPtr reduce_by_key(ExprPtr op, ExprPtr src) { return mk(node::ReduceByKey{std::move(op), std::move(src)}); }
ExprPtr cogroup(ExprPtr a, ExprPtr b) { return mk(node::Cogroup{std::move(a), std::move(b)}); }
ExprPtr join(ExprPtr a, ExprPtr b) { return mk(node::Join{std::move(a), std::move(b)}); }
ExprPtr fixpoint(AggregatorSpec delta, ExprPtr seed, ExprPtr phi, std::string label) {
  return mk(node::Fixpoint{std::move(delta), std::move(seed), std::move(phi), std::move(label)});
}
ExprPtr let(std::string name, ExprPtr bound, ExprPtr body) {
  return mk(node::Let{std::move(name), std::move(bound), std::move(body)});
}
ExprPtr aggregate(AggregatorSpec delta, ExprPtr src) { return mk(node::Aggregate{std::move(delta), std::move(src)}); }
ExprPtr dist(ExprPtr src) { return mk(node::Dist{std::move(src)}); }

ExprPtr from_pattern(const Pattern& p) {
  if (p.is_var()) return var(p.name());
  std::vector<ExprPtr> args;
  for (const auto& s : p.subs()) args.push_back(from_pattern(s));
  return construct(p.name(), std::move(args));
}

}  // namespace ex

// ---- structural equality ----

static bool eq(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return structurally_equal(*a, *b);
}

bool structurally_equal(const AggregatorSpec& a, const AggregatorSpec& b) {
  if (a.kind != b.kind || a.op != b.op || a.var != b.var || a.pattern != b.pattern) return false;
  return eq(a.predicate, b.predicate);
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (&a == &b) return true;
  if (a.node().index() != b.node().index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = *b.as<T>();
        if constexpr (std::is_same_v<T, node::Const>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, node::Var>) {
          return x.name == y.name;
        } else if constexpr (std::is_same_v<T, node::Singleton>) {
          return eq(x.elem, y.elem);
        } else if constexpr (std::is_same_v<T, node::Lambda>) {
          if (x.cases.size() != y.cases.size()) return false;
          for (std::size_t i = 0; i < x.cases.size(); ++i) {
            if (!(x.cases[i].pattern == y.cases[i].pattern) || !eq(x.cases[i].body, y.cases[i].body)) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, node::Apply>) {
          return eq(x.fn, y.fn) && eq(x.arg, y.arg);
        } else if constexpr (std::is_same_v<T, node::Construct>) {
          if (x.name != y.name || x.args.size() != y.args.size()) return false;
          for (std::size_t i = 0; i < x.args.size(); ++i)
            if (!eq(x.args[i], y.args[i])) return false;
          return true;
        } else if constexpr (std::is_same_v<T, node::Flatmap>) {
          return eq(x.fn, y.fn) && eq(x.src, y.src);
        } else if constexpr (std::is_same_v<T, node::Reduce>) {
          return eq(x.op, y.op) && eq(x.zero, y.zero) && eq(x.src, y.src);
        } else if constexpr (std::is_same_v<T, node::ReduceByKey>) {
          return eq(x.op, y.op) && eq(x.src, y.src);
        } else if constexpr (std::is_same_v<T, node::Cogroup> || std::is_same_v<T, node::Join>) {
          return eq(x.left, y.left) && eq(x.right, y.right);
        } else if constexpr (std::is_same_v<T, node::Fixpoint>) {
          return structurally_equal(x.delta, y.delta) && eq(x.seed, y.seed) && eq(x.phi, y.phi);
        } else if constexpr (std::is_same_v<T, node::Let>) {
          return x.name == y.name && eq(x.bound, y.bound) && eq(x.body, y.body);
        } else if constexpr (std::is_same_v<T, node::Aggregate>) {
          return structurally_equal(x.delta, y.delta) && eq(x.src, y.src);
        } else {
          return eq(x.src, y.src);
        }
      },
      a.node());
}

// ---- free variables ----

namespace {

void free_vars(const Expr& e, std::set<std::string>& out);

void free_vars_except(const Expr& e, const std::vector<std::string>& bound, std::set<std::string>& out) {
  std::set<std::string> inner;
  free_vars(e, inner);
  for (const auto& b : bound) inner.erase(b);
  out.insert(inner.begin(), inner.end());
}

void spec_free_vars(const AggregatorSpec& s, std::set<std::string>& out) {
  if (s.kind == AggregatorKind::Filter && s.predicate) {
    free_vars_except(*s.predicate, s.pattern ? s.pattern->variables() : std::vector<std::string>{s.var}, out);
  }
}

void free_vars(const Expr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, node::Const>) {
        } else if constexpr (std::is_same_v<T, node::Var>) {
          out.insert(x.name);
        } else if constexpr (std::is_same_v<T, node::Singleton>) {
          free_vars(*x.elem, out);
        } else if constexpr (std::is_same_v<T, node::Lambda>) {
          for (const auto& c : x.cases) free_vars_except(*c.body, c.pattern.variables(), out);
        } else if constexpr (std::is_same_v<T, node::Apply>) {
          free_vars(*x.fn, out);
          free_vars(*x.arg, out);
        } else if constexpr (std::is_same_v<T, node::Construct>) {
          for (const auto& a : x.args) free_vars(*a, out);
        } else if constexpr (std::is_same_v<T, node::Flatmap>) {
          free_vars(*x.fn, out);
          free_vars(*x.src, out);
        } else if constexpr (std::is_same_v<T, node::Reduce>) {
          free_vars(*x.op, out);
          free_vars(*x.zero, out);
          free_vars(*x.src, out);
        } else if constexpr (std::is_same_v<T, node::ReduceByKey>) {
          free_vars(*x.op, out);
          free_vars(*x.src, out);
        } else if constexpr (std::is_same_v<T, node::Cogroup> || std::is_same_v<T, node::Join>) {
          free_vars(*x.left, out);
          free_vars(*x.right, out);
        } else if constexpr (std::is_same_v<T, node::Fixpoint>) {
          spec_free_vars(x.delta, out);
          free_vars(*x.seed, out);
          free_vars(*x.phi, out);
        } else if constexpr (std::is_same_v<T, node::Let>) {
          free_vars(*x.bound, out);
          free_vars_except(*x.body, {x.name}, out);
        } else if constexpr (std::is_same_v<T, node::Aggregate>) {
          spec_free_vars(x.delta, out);
          free_vars(*x.src, out);
        } else {
          free_vars(*x.src, out);
        }
      },
      e.node());
}

}  // namespace

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  free_vars(e, out);
  return out;
}

bool occurs_free(const Expr& e, std::string_view name) { return free_variables(e).count(std::string(name)) > 0; }

std::optional<IfParts> as_if(const Expr& e) {
  const auto* app = e.as<node::Apply>();
  if (!app) return std::nullopt;
  const auto* lam = app->fn->as<node::Lambda>();
  if (!lam || lam->cases.size() != 2) return std::nullopt;
  const auto& c0 = lam->cases[0].pattern;
  const auto& c1 = lam->cases[1].pattern;
  if (c0.is_var() || c0.name() != kTrueCtor || !c0.subs().empty()) return std::nullopt;
  if (c1.is_var() || c1.name() != kFalseCtor || !c1.subs().empty()) return std::nullopt;
  return IfParts{app->arg, lam->cases[0].body, lam->cases[1].body};
}

bool is_empty_bag_literal(const Expr& e) {
  const auto* c = e.as<node::Const>();
  return c && c->value.is_bag() && c->value.as_bag().empty();
}

}  // namespace mumonoids
