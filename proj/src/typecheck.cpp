#include "mumonoids/typecheck.hpp"

#include <map>
#include <span>

#include "mumonoids/builtins.hpp"
#include "mumonoids/error.hpp"

namespace mumonoids {

namespace {

struct Deferred;

struct Ctx {
  std::map<std::string, TypeExpr, std::less<>> types;
  std::map<std::string, std::shared_ptr<const Deferred>, std::less<>> fns;

  void bind_type(const std::string& name, TypeExpr t) {
    fns.erase(name);
    types.insert_or_assign(name, std::move(t));
  }
};

struct Deferred {
  ExprPtr lambda;
  Ctx ctx;
};

Ctx from_env(const TypeEnv& env) {
  Ctx c;
  for (const auto& [n, t] : env.bindings()) c.types.emplace(n, t);
  return c;
}

TypeExpr infer_in(const Ctx& ctx, const ExprPtr& e);
TypeExpr apply_in(const Ctx& ctx, const ExprPtr& fn, std::span<const TypeExpr> args);

const TypeExpr& expect_bag(const TypeExpr& t, const char* rule, const std::string& what) {
  if (!t.is_bag()) throw_type_error(rule, what + " must be a bag, found " + to_string(t));
  return t;
}

void expect_local(const TypeExpr& t, const char* rule) {
  if (contains_dist_bag(t)) {
    throw_type_error(rule, "distributed bags cannot be nested inside values, found " + to_string(t));
  }
}

TypeExpr combine_or(const TypeExpr& a, const TypeExpr& b, const char* rule, const std::string& what) {
  auto r = try_sum_combine(a, b);
  if (!r) throw_type_error(rule, what + ": " + to_string(a) + " and " + to_string(b) + " are incompatible");
  return *r;
}

// Key and value types of a bag of pairs; Bottom elements split into Bottoms.
std::pair<TypeExpr, TypeExpr> split_pair(const TypeExpr& elem, const char* rule) {
  if (elem.kind() == TypeKind::Bottom) return {TypeExpr::bottom(), TypeExpr::bottom()};
  if (!elem.is_tuple(2)) throw_type_error(rule, "expected a bag of (key, value) pairs, found elements " + to_string(elem));
  const auto& p = elem.single_case()->params;
  return {p[0], p[1]};
}

TypeExpr check_lambda(const Ctx& ctx, const node::Lambda& lam, std::span<const TypeExpr> args) {
  const TypeExpr& arg = args.front();
  TypeExpr param = TypeExpr::bottom();
  TypeExpr result = TypeExpr::bottom();
  bool reachable = false;
  for (const auto& c : lam.cases) {
    auto narrowed = narrow_to_pattern(c.pattern, arg);
    if (!narrowed) continue;
    reachable = true;
    Ctx inner = ctx;
    const TypeEnv bound = match_type(c.pattern, *narrowed);
    for (const auto& [n, t] : bound.bindings()) inner.bind_type(n, t);
    TypeExpr r = args.size() == 1 ? infer_in(inner, c.body) : apply_in(inner, c.body, args.subspan(1));
    result = combine_or(result, r, "lambda", "lambda cases return different types");
    param = combine_or(param, *narrowed, "lambda", "lambda cases");
  }
  if (!reachable || !subtype(arg, param)) {
    throw_type_error("apply", "lambda patterns do not cover argument type " + to_string(arg));
  }
  return result;
}

TypeExpr apply_builtin(const Builtin& b, std::vector<TypeExpr> args) {
  if (args.size() < b.arity) {
    throw_type_error("builtin", "builtin " + b.name + " is partially applied; it needs " + std::to_string(b.arity) +
                                    " arguments");
  }
  if (args.size() > b.arity) throw_type_error("builtin", "too many arguments for builtin " + b.name);
  for (const auto& a : args) {
    // Code reachable only through empty bags is vacuously well typed.
    if (a.kind() == TypeKind::Bottom) return TypeExpr::bottom();
  }
  auto r = b.type(args);
  if (!r) {
    std::string msg = "builtin " + b.name + " : " + b.signature + " cannot take";
    for (const auto& a : args) msg += " " + to_string(a);
    throw_type_error("builtin", msg);
  }
  return *r;
}

TypeExpr apply_in(const Ctx& ctx, const ExprPtr& fn, std::span<const TypeExpr> args_in) {
  // Collect the whole application spine so builtins see all their arguments.
  std::vector<TypeExpr> args(args_in.begin(), args_in.end());
  ExprPtr head = fn;
  while (const auto* app = head->as<node::Apply>()) {
    if (app->fn->is<node::Lambda>()) break;
    args.insert(args.begin(), infer_in(ctx, app->arg));
    head = app->fn;
  }
  if (const auto* app = head->as<node::Apply>()) {
    // (λ...) e applied to further arguments: its result must itself be a function.
    std::vector<TypeExpr> all;
    all.push_back(infer_in(ctx, app->arg));
    all.insert(all.end(), args.begin(), args.end());
    return check_lambda(ctx, *app->fn->as<node::Lambda>(), all);
  }
  if (const auto* lam = head->as<node::Lambda>()) return check_lambda(ctx, *lam, args);
  if (const auto* c = head->as<node::Const>()) {
    if (c->value.kind() != ValueKind::Builtin) {
      throw_type_error("apply", "cannot apply a value of type " + to_string(type_of_value(c->value)));
    }
    std::vector<TypeExpr> all;
    for (const auto& v : c->value.builtin_applied()) all.push_back(type_of_value(v));
    all.insert(all.end(), args.begin(), args.end());
    return apply_builtin(c->value.builtin_def(), std::move(all));
  }
  if (const auto* v = head->as<node::Var>()) {
    if (auto it = ctx.fns.find(v->name); it != ctx.fns.end()) {
      return check_lambda(it->second->ctx, *it->second->lambda->as<node::Lambda>(), args);
    }
    if (auto it = ctx.types.find(v->name); it != ctx.types.end()) {
      TypeExpr t = it->second;
      for (const auto& a : args) {
        if (t.kind() != TypeKind::Func) throw_type_error("apply", v->name + " is not a function");
        if (!subtype(a, t.from())) {
          throw_type_error("apply", "argument of type " + to_string(a) + " does not fit " + to_string(t.from()));
        }
        TypeExpr next = t.to();
        t = next;
      }
      return t;
    }
    throw_type_error("var", "unbound variable " + v->name);
  }
  if (const auto* let = head->as<node::Let>()) {
    Ctx inner = ctx;
    if (let->bound->is<node::Lambda>()) {
      inner.types.erase(let->name);
      inner.fns.insert_or_assign(let->name, std::make_shared<const Deferred>(Deferred{let->bound, ctx}));
    } else {
      inner.bind_type(let->name, infer_in(ctx, let->bound));
    }
    return apply_in(inner, let->body, args);
  }
  throw_type_error("apply", "expression in function position is not a function");
}

TypeExpr aggregator_checked(const Ctx& ctx, const AggregatorSpec& d, const TypeExpr& bag);

TypeExpr infer_fixpoint(const Ctx& ctx, const node::Fixpoint& f) {
  const TypeExpr seed = expect_bag(infer_in(ctx, f.seed), "fixpoint", "fixpoint seed");
  TypeExpr t = seed;
  // Widen until φ maps the bag type into itself; sums are finite so this settles fast.
  for (int round = 0; round < 8; ++round) {
    const TypeExpr in[] = {t};
    const TypeExpr out = apply_in(ctx, f.phi, in);
    if (!out.is_bag() || out.bag_kind() != seed.bag_kind()) {
      throw_type_error("fixpoint", "fixpoint body maps " + to_string(t) + " to " + to_string(out) +
                                       "; input and output must share one bag type");
    }
    if (subtype(out, t)) return aggregator_checked(ctx, f.delta, t);
    t = combine_or(t, out, "fixpoint", "fixpoint body output does not fit its input");
  }
  throw_type_error("fixpoint", "fixpoint type does not stabilise at " + to_string(t));
}

TypeExpr infer_in(const Ctx& ctx, const ExprPtr& e) {
  return std::visit(
      [&](const auto& x) -> TypeExpr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, node::Const>) {
          if (x.value.is_function()) throw_type_error("builtin", "function value used where data is expected");
          return type_of_value(x.value);
        } else if constexpr (std::is_same_v<T, node::Var>) {
          if (auto it = ctx.types.find(x.name); it != ctx.types.end()) return it->second;
          if (ctx.fns.count(x.name)) {
            throw_type_error("lambda", "function " + x.name + " is used where data is expected");
          }
          throw_type_error("var", "unbound variable " + x.name);
        } else if constexpr (std::is_same_v<T, node::Singleton>) {
          TypeExpr t = infer_in(ctx, x.elem);
          expect_local(t, "local");
          return TypeExpr::local_bag(t);
        } else if constexpr (std::is_same_v<T, node::Lambda>) {
          throw_type_error("lambda", "cannot infer the parameter type of a lambda that is not applied");
        } else if constexpr (std::is_same_v<T, node::Apply>) {
          const TypeExpr arg = infer_in(ctx, x.arg);
          return apply_in(ctx, x.fn, std::span<const TypeExpr>(&arg, 1));
        } else if constexpr (std::is_same_v<T, node::Construct>) {
          std::vector<TypeExpr> params;
          for (const auto& a : x.args) {
            params.push_back(infer_in(ctx, a));
            expect_local(params.back(), "local");
          }
          return TypeExpr::constructed(x.name, std::move(params));
        } else if constexpr (std::is_same_v<T, node::Flatmap>) {
          const TypeExpr src = expect_bag(infer_in(ctx, x.src), "flatmap", "flatmap source");
          const TypeExpr in[] = {src.elem()};
          const TypeExpr r = apply_in(ctx, x.fn, in);
          if (r.kind() != TypeKind::LocalBag) {
            throw_type_error("flatmap", "flatmap function must return a local bag, found " + to_string(r));
          }
          return TypeExpr::bag(src.bag_kind(), r.elem());
        } else if constexpr (std::is_same_v<T, node::Reduce>) {
          const TypeExpr src = expect_bag(infer_in(ctx, x.src), "reduce", "reduce source");
          const TypeExpr t = combine_or(infer_in(ctx, x.zero), src.elem(), "reduce", "zero and elements");
          const TypeExpr in[] = {t, t};
          const TypeExpr r = apply_in(ctx, x.op, in);
          return combine_or(t, r, "reduce", "operator result");
        } else if constexpr (std::is_same_v<T, node::ReduceByKey>) {
          const TypeExpr src = expect_bag(infer_in(ctx, x.src), "reduceByKey", "reduceByKey source");
          auto [k, v] = split_pair(src.elem(), "reduceByKey");
          if (src.elem().kind() == TypeKind::Bottom) return src;
          const TypeExpr in[] = {v, v};
          const TypeExpr r = combine_or(v, apply_in(ctx, x.op, in), "reduceByKey", "operator result");
          return TypeExpr::bag(src.bag_kind(), TypeExpr::pair(k, r));
        } else if constexpr (std::is_same_v<T, node::Join> || std::is_same_v<T, node::Cogroup>) {
          constexpr const char* rule = std::is_same_v<T, node::Join> ? "join" : "cogroup";
          const TypeExpr a = expect_bag(infer_in(ctx, x.left), rule, "left operand");
          const TypeExpr b = expect_bag(infer_in(ctx, x.right), rule, "right operand");
          auto [ka, va] = split_pair(a.elem(), rule);
          auto [kb, vb] = split_pair(b.elem(), rule);
          const TypeExpr k = combine_or(ka, kb, rule, "join keys");
          const BagKind out =
              a.bag_kind() == BagKind::Local && b.bag_kind() == BagKind::Local ? BagKind::Local : BagKind::Distributed;
          if constexpr (std::is_same_v<T, node::Join>) {
            return TypeExpr::bag(out, TypeExpr::pair(k, TypeExpr::pair(va, vb)));
          } else {
            return TypeExpr::bag(out, TypeExpr::pair(k, TypeExpr::pair(TypeExpr::local_bag(va), TypeExpr::local_bag(vb))));
          }
        } else if constexpr (std::is_same_v<T, node::Fixpoint>) {
          return infer_fixpoint(ctx, x);
        } else if constexpr (std::is_same_v<T, node::Let>) {
          Ctx inner = ctx;
          if (x.bound->template is<node::Lambda>()) {
            inner.types.erase(x.name);
            inner.fns.insert_or_assign(x.name, std::make_shared<const Deferred>(Deferred{x.bound, ctx}));
          } else {
            inner.bind_type(x.name, infer_in(ctx, x.bound));
          }
          return infer_in(inner, x.body);
        } else if constexpr (std::is_same_v<T, node::Aggregate>) {
          const TypeExpr src = expect_bag(infer_in(ctx, x.src), "aggregate", "aggregated expression");
          return aggregator_checked(ctx, x.delta, src);
        } else {
          const TypeExpr src = expect_bag(infer_in(ctx, x.src), "dist", "dist operand");
          return TypeExpr::dist_bag(src.elem());
        }
      },
      e->node());
}

TypeExpr aggregator_checked(const Ctx& ctx, const AggregatorSpec& d, const TypeExpr& bag) {
  const TypeExpr& elem = bag.elem();
  if (elem.kind() == TypeKind::Bottom) return bag;
  switch (d.kind) {
    case AggregatorKind::Identity:
    case AggregatorKind::Distinct: return bag;
    case AggregatorKind::ReduceByKey: {
      auto [k, v] = split_pair(elem, "aggregate");
      const TypeExpr in[] = {v, v};
      const TypeExpr r = apply_builtin(builtin(d.op), {in[0], in[1]});
      if (!subtype(r, v)) throw_type_error("aggregate", d.name() + " changes the value type of " + to_string(elem));
      return bag;
    }
    case AggregatorKind::Filter: {
      auto narrowed = narrow_to_pattern(*d.pattern, elem);
      if (!narrowed) throw_type_error("aggregate", "filter pattern does not match elements of type " + to_string(elem));
      const TypeEnv bound = match_type(*d.pattern, *narrowed);
      Ctx inner = ctx;
      inner.bind_type(d.var, *bound.find(d.var));
      const TypeExpr r = infer_in(inner, d.predicate);
      if (!subtype(r, TypeExpr::boolean())) throw_type_error("aggregate", "filter predicate must be Bool, found " + to_string(r));
      return bag;
    }
  }
  return bag;
}

}  // namespace

TypeExpr type_of_value(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Int: return TypeExpr::int_type();
    case ValueKind::Float: return TypeExpr::float_type();
    case ValueKind::String: return TypeExpr::string_type();
    case ValueKind::Constructed: {
      std::vector<TypeExpr> params;
      for (const auto& a : v.args()) params.push_back(type_of_value(a));
      return TypeExpr::constructed(v.ctor_name(), std::move(params));
    }
    case ValueKind::Bag: {
      TypeExpr elem = TypeExpr::bottom();
      for (const auto& [e, c] : v.as_bag().entries()) {
        elem = combine_or(elem, type_of_value(e), "sum", "bag elements");
      }
      return TypeExpr::local_bag(elem);
    }
    case ValueKind::Builtin:
    case ValueKind::Closure: break;
  }
  throw_type_error("builtin", "function values have no data type");
}

TypeExpr infer(const TypeEnv& env, const ExprPtr& e) { return infer_in(from_env(env), e); }

TypeExpr infer_application(const TypeEnv& env, const ExprPtr& fn, const std::vector<TypeExpr>& args) {
  if (args.empty()) return infer(env, fn);
  return apply_in(from_env(env), fn, args);
}

void check_aggregator(const TypeEnv& env, const AggregatorSpec& delta, const TypeExpr& elem) {
  aggregator_checked(from_env(env), delta, TypeExpr::local_bag(elem));
}

bool preserves_path(const TypeEnv& env, const ExprPtr& phi, const TypeExpr& elem, BagKind kind,
                    const TypePath& path) {
  const TypeExpr probe = TypeExpr::bag(kind, build_param_type(elem, path));
  try {
    const TypeExpr in[] = {probe};
    const TypeExpr out = apply_in(from_env(env), phi, in);
    return subtype(out, probe);
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::Type) return false;
    throw;
  }
}

bool check_condition_c(const TypeEnv& env, const ExprPtr& phi, const TypeExpr& elem, BagKind kind,
                       const Pattern& pattern, const std::string& var) {
  if (!narrow_to_pattern(pattern, elem)) {
    throw_type_error("match", "pattern does not match element type " + to_string(elem));
  }
  return preserves_path(env, phi, elem, kind, pattern_path(pattern, var));
}

}  // namespace mumonoids
