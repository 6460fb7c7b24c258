#include "mumonoids/optimizer.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <set>

#include "mumonoids/builtins.hpp"
#include "mumonoids/error.hpp"
#include "mumonoids/eval.hpp"
#include "mumonoids/gen.hpp"
#include "mumonoids/parser.hpp"
#include "mumonoids/typecheck.hpp"

namespace mumonoids {

std::size_t RewriteTrace::applied_count() const {
  return static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(), [](const auto& s) { return s.applied; }));
}

bool RewriteTrace::applied(std::string_view rule) const {
  return std::any_of(steps.begin(), steps.end(), [&](const auto& s) { return s.applied && s.rule == rule; });
}

std::string RewriteTrace::to_text() const {
  std::string out;
  for (const auto& s : steps) {
    out += s.rule + (s.applied ? " applied: " : " skipped: ") + s.reason + "\n";
    if (!s.before.empty()) out += "  before: " + s.before + "\n";
    if (!s.after.empty()) out += "  after:  " + s.after + "\n";
  }
  return out;
}

namespace {

using ChildFn = std::function<ExprPtr(const ExprPtr& child, const std::vector<std::string>& binders)>;

std::vector<std::string> spec_binders(const AggregatorSpec& s) {
  return s.pattern ? s.pattern->variables() : std::vector<std::string>{s.var};
}

AggregatorSpec map_spec(const AggregatorSpec& s, const ChildFn& f, bool& changed) {
  if (s.kind != AggregatorKind::Filter || !s.predicate) return s;
  AggregatorSpec out = s;
  out.predicate = f(s.predicate, spec_binders(s));
  changed |= out.predicate != s.predicate;
  return out;
}

// Rebuilds e with f applied to every direct subterm. `binders` lists the
// names the node binds around that subterm. Returns e itself when nothing changed.
ExprPtr map_children(const ExprPtr& e, const ChildFn& f) {
  bool changed = false;
  auto sub = [&](const ExprPtr& c, const std::vector<std::string>& b = {}) {
    ExprPtr r = f(c, b);
    changed |= r != c;
    return r;
  };
  ExprPtr out = std::visit(
      [&](const auto& x) -> ExprPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, node::Const> || std::is_same_v<T, node::Var>) {
          return e;
        } else if constexpr (std::is_same_v<T, node::Singleton>) {
          return ex::singleton(sub(x.elem));
        } else if constexpr (std::is_same_v<T, node::Lambda>) {
          std::vector<LambdaCase> cases;
          for (const auto& c : x.cases) cases.push_back({c.pattern, sub(c.body, c.pattern.variables())});
          return ex::lambda(std::move(cases));
        } else if constexpr (std::is_same_v<T, node::Apply>) {
          auto fn = sub(x.fn);
          return ex::apply(fn, sub(x.arg));
        } else if constexpr (std::is_same_v<T, node::Construct>) {
          std::vector<ExprPtr> args;
          for (const auto& a : x.args) args.push_back(sub(a));
          return ex::construct(x.name, std::move(args));
        } else if constexpr (std::is_same_v<T, node::Flatmap>) {
          auto fn = sub(x.fn);
          return ex::flatmap(fn, sub(x.src));
        } else if constexpr (std::is_same_v<T, node::Reduce>) {
          auto op = sub(x.op);
          auto zero = sub(x.zero);
          return ex::reduce(op, zero, sub(x.src));
        } else if constexpr (std::is_same_v<T, node::ReduceByKey>) {
          auto op = sub(x.op);
          return ex::reduce_by_key(op, sub(x.src));
        } else if constexpr (std::is_same_v<T, node::Cogroup>) {
          auto l = sub(x.left);
          return ex::cogroup(l, sub(x.right));
        } else if constexpr (std::is_same_v<T, node::Join>) {
          auto l = sub(x.left);
          return ex::join(l, sub(x.right));
        } else if constexpr (std::is_same_v<T, node::Fixpoint>) {
          auto d = map_spec(x.delta, f, changed);
          auto seed = sub(x.seed);
          return ex::fixpoint(std::move(d), seed, sub(x.phi), x.label);
        } else if constexpr (std::is_same_v<T, node::Let>) {
          auto bound = sub(x.bound);
          return ex::let(x.name, bound, sub(x.body, {x.name}));
        } else if constexpr (std::is_same_v<T, node::Aggregate>) {
          auto d = map_spec(x.delta, f, changed);
          return ex::aggregate(std::move(d), sub(x.src));
        } else {
          return ex::dist(sub(x.src));
        }
      },
      e->node());
  return changed ? out : e;
}

bool binds(const std::vector<std::string>& names, const std::string& x) {
  return std::find(names.begin(), names.end(), x) != names.end();
}

std::size_t count_free(const ExprPtr& e, const std::string& x) {
  if (const auto* v = e->as<node::Var>()) return v->name == x ? 1 : 0;
  std::size_t n = 0;
  map_children(e, [&](const ExprPtr& c, const std::vector<std::string>& b) {
    if (!binds(b, x)) n += count_free(c, x);
    return c;
  });
  return n;
}

struct Capture {};

// e[x := r], throwing Capture when a binder would capture a free variable of r.
ExprPtr substitute(const ExprPtr& e, const std::string& x, const ExprPtr& r, const std::set<std::string>& r_free) {
  if (const auto* v = e->as<node::Var>()) return v->name == x ? r : e;
  return map_children(e, [&](const ExprPtr& c, const std::vector<std::string>& b) {
    if (binds(b, x) || count_free(c, x) == 0) return c;
    for (const auto& name : b)
      if (r_free.count(name)) throw Capture{};
    return substitute(c, x, r, r_free);
  });
}

std::string fragment(const ExprPtr& e) {
  std::string s = print_expr(e);
  if (s.size() > 200) s = s.substr(0, 197) + "...";
  return s;
}

// Applies `site` bottom-up to every data-valued subterm outside function bodies,
// tracking the types of enclosing let-bound data.
using SiteFn = std::function<ExprPtr(const ExprPtr&, const TypeEnv&)>;

ExprPtr transform(const ExprPtr& e, const TypeEnv& env, const SiteFn& site) {
  if (e->is<node::Lambda>()) return e;
  ExprPtr rebuilt;
  if (const auto* let = e->as<node::Let>()) {
    ExprPtr bound = let->bound->is<node::Lambda>() ? let->bound : transform(let->bound, env, site);
    TypeEnv inner = env;
    if (!bound->is<node::Lambda>()) {
      try {
        inner.bind(let->name, infer(env, bound));
      } catch (const Error&) {
      }
    }
    ExprPtr body = transform(let->body, inner, site);
    rebuilt = (bound == let->bound && body == let->body) ? e : ex::let(let->name, bound, body);
  } else {
    rebuilt = map_children(e, [&](const ExprPtr& c, const std::vector<std::string>& b) {
      if (!b.empty() || c->is<node::Lambda>()) return c;
      return transform(c, env, site);
    });
  }
  return site(rebuilt, env);
}

void verify(const char* rule, const TypeEnv& env, const ExprPtr& e) {
  try {
    infer(env, e);
  } catch (const Error& err) {
    throw Error(ErrorKind::Internal, rule, std::string(rule) + " produced an ill-typed term: " + err.what());
  }
}

struct FilterFn {
  Pattern pattern;
  ExprPtr cond;
};

std::optional<FilterFn> as_filter(const Expr& fn) {
  const auto* lam = fn.as<node::Lambda>();
  if (!lam || lam->cases.size() != 1) return std::nullopt;
  const auto& c = lam->cases.front();
  auto parts = as_if(*c.body);
  if (!parts) return std::nullopt;
  const auto* keep = parts->then_branch->as<node::Singleton>();
  if (!keep || !structurally_equal(*keep->elem, *ex::from_pattern(c.pattern))) return std::nullopt;
  if (!is_empty_bag_literal(*parts->else_branch)) return std::nullopt;
  return FilterFn{c.pattern, parts->cond};
}

ExprPtr make_filter(const Pattern& p, ExprPtr cond) {
  return ex::lambda(p, ex::if_then_else(std::move(cond), ex::singleton(ex::from_pattern(p)), ex::empty_bag()));
}

void split_conjuncts(const ExprPtr& c, std::vector<ExprPtr>& out) {
  if (const auto* outer = c->as<node::Apply>()) {
    if (const auto* inner = outer->fn->as<node::Apply>()) {
      if (const auto* k = inner->fn->as<node::Const>()) {
        if (k->value.kind() == ValueKind::Builtin && k->value.builtin_def().name == "and" &&
            k->value.builtin_applied().empty()) {
          split_conjuncts(inner->arg, out);
          split_conjuncts(outer->arg, out);
          return;
        }
      }
    }
  }
  out.push_back(c);
}

ExprPtr conjoin(const std::vector<ExprPtr>& cs) {
  ExprPtr out = cs.front();
  for (std::size_t i = 1; i < cs.size(); ++i) out = ex::call("and", out, cs[i]);
  return out;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

// Pattern variables the condition reads that φ may change.
std::vector<std::string> unpreserved_vars(const TypeEnv& env, const node::Fixpoint& fix, const TypeExpr& bag,
                                          const Pattern& p, const ExprPtr& cond) {
  std::vector<std::string> bad;
  const auto used = free_variables(*cond);
  for (const auto& v : p.variables()) {
    if (!used.count(v)) continue;
    bool ok = false;
    try {
      ok = check_condition_c(env, fix.phi, bag.elem(), bag.bag_kind(), p, v);
    } catch (const Error&) {
    }
    if (!ok) bad.push_back(v);
  }
  return bad;
}

struct RulePass {
  std::vector<RewriteStep> applied;
  std::vector<RewriteStep> skipped;
};

ExprPtr pf_site(const ExprPtr& e, const TypeEnv& env, RulePass& pass) {
  const auto* fm = e->as<node::Flatmap>();
  if (!fm) return e;
  const auto* fix = fm->src->as<node::Fixpoint>();
  auto filter = as_filter(*fm->fn);
  if (!fix || !filter) return e;
  if (fix->delta.kind != AggregatorKind::Distinct) {
    pass.skipped.push_back({"PF", false, "the fixpoint aggregates with " + fix->delta.name() + ", not distinct",
                            fragment(e), {}});
    return e;
  }
  TypeExpr bag;
  try {
    bag = infer(env, fm->src);
  } catch (const Error& err) {
    pass.skipped.push_back({"PF", false, std::string("fixpoint does not typecheck: ") + err.what(), fragment(e), {}});
    return e;
  }
  std::vector<ExprPtr> conjuncts, pushed, kept;
  split_conjuncts(filter->cond, conjuncts);
  std::vector<std::string> failing;
  for (const auto& c : conjuncts) {
    auto bad = unpreserved_vars(env, *fix, bag, filter->pattern, c);
    if (bad.empty()) {
      pushed.push_back(c);
    } else {
      kept.push_back(c);
      for (auto& b : bad)
        if (!binds(failing, b)) failing.push_back(b);
    }
  }
  if (pushed.empty()) {
    pass.skipped.push_back({"PF", false, "condition (C) fails for " + join_names(failing), fragment(e), {}});
    return e;
  }
  ExprPtr seed = ex::flatmap(make_filter(filter->pattern, conjoin(pushed)), fix->seed);
  ExprPtr out = ex::fixpoint(fix->delta, seed, fix->phi, fix->label);
  if (!kept.empty()) out = ex::flatmap(make_filter(filter->pattern, conjoin(kept)), out);
  verify("PF", env, out);
  std::string reason = kept.empty() ? "condition (C) holds for the filtered variables"
                                    : "split the condition; kept the part reading " + join_names(failing) + " outside";
  pass.applied.push_back({"PF", true, reason, fragment(e), fragment(out)});
  return out;
}

// The elements of r whose key occurs in a, as one cogroup pass.
ExprPtr semijoin_filter(const ExprPtr& r, const ExprPtr& a) {
  Pattern group = Pattern::tuple({Pattern::var("k"), Pattern::tuple({Pattern::var("sx"), Pattern::var("sy")})});
  ExprPtr rekey = ex::lambda(Pattern::var("x"), ex::singleton(ex::tuple({ex::var("k"), ex::var("x")})));
  ExprPtr body = ex::if_then_else(ex::apply(ex::builtin("nonEmpty"), ex::var("sy")), ex::flatmap(rekey, ex::var("sx")),
                                  ex::empty_bag());
  return ex::flatmap(ex::lambda(group, body), ex::cogroup(r, a));
}

bool is_semijoin_of(const ExprPtr& seed, const ExprPtr& a) {
  const auto* fm = seed->as<node::Flatmap>();
  if (!fm) return false;
  const auto* cg = fm->src->as<node::Cogroup>();
  return cg && structurally_equal(*cg->right, *a) && structurally_equal(*seed, *semijoin_filter(cg->left, a));
}

ExprPtr pj_site(const ExprPtr& e, const TypeEnv& env, RulePass& pass) {
  const auto* j = e->as<node::Join>();
  if (!j) return e;
  const bool right = j->right->is<node::Fixpoint>();
  const ExprPtr& fix_e = right ? j->right : j->left;
  const ExprPtr& other = right ? j->left : j->right;
  const auto* fix = fix_e->as<node::Fixpoint>();
  if (!fix) return e;
  auto skip = [&](std::string why) {
    pass.skipped.push_back({"PJ", false, std::move(why), fragment(e), {}});
    return e;
  };
  if (fix->delta.kind != AggregatorKind::Distinct) return skip("the fixpoint aggregates with " + fix->delta.name());
  if (is_semijoin_of(fix->seed, other)) return skip("the fixpoint seed is already restricted to the keys of the other side");
  TypeExpr bag;
  try {
    bag = infer(env, fix_e);
  } catch (const Error& err) {
    return skip(std::string("fixpoint does not typecheck: ") + err.what());
  }
  if (!bag.elem().is_tuple(2)) return skip("fixpoint elements are not key/value pairs");
  const TypePath key{{std::string(kTupleCtor), 0}};
  if (!preserves_path(env, fix->phi, bag.elem(), bag.bag_kind(), key)) {
    return skip("condition (C) fails for the join key");
  }
  ExprPtr new_fix = ex::fixpoint(fix->delta, semijoin_filter(fix->seed, other), fix->phi, fix->label);
  ExprPtr out = right ? ex::join(other, new_fix) : ex::join(new_fix, other);
  verify("PJ", env, out);
  pass.applied.push_back({"PJ", true, "the body preserves the join key", fragment(e), fragment(out)});
  return out;
}

// Random values for every name in env, used to close fixpoint bodies for probing.
EnvPtr random_inputs(const TypeEnv& env, std::mt19937_64& rng) {
  std::vector<Binding> frame;
  for (const auto& [n, t] : env.bindings()) frame.emplace_back(n, random_value(t, rng, 4, 5));
  return extend(empty_env(), std::move(frame));
}

struct Evidence {
  bool ok = false;
  std::string reason;
};

// Whether δ may run inside the loop of `fix`. Distinct and identity always
// may; any other aggregator needs a programmer annotation that a random probe,
// with fresh program inputs each round, fails to refute.
Evidence compatibility_evidence(const AggregatorSpec& delta, const node::Fixpoint& fix, const TypeExpr& elem,
                                const TypeEnv& env, const OptimizerContext& ctx) {
  if (delta.kind == AggregatorKind::Distinct) return {true, "distinct is compatible with every body"};
  if (delta.kind == AggregatorKind::Identity) return {true, "identity is compatible with every body"};
  if (!ctx.annotations.asserts(delta.name(), fix.label)) return {false, "no compatibility evidence"};
  constexpr std::size_t kRounds = 8;
  std::mt19937_64 rng(ctx.seed);
  const TypeExpr sample_type = TypeExpr::local_bag(elem);
  ProbeResult probe;
  try {
    for (std::size_t round = 0; round < kRounds && probe.verdict == Verdict::NotRefuted; ++round) {
      const EnvPtr values = random_inputs(env, rng);
      const Aggregator d = Aggregator::from_spec(delta, values);
      const Value phi = eval(values, fix.phi);
      const std::size_t share = (ctx.probe_samples + kRounds - 1) / kRounds;
      const ProbeResult r = probe_compatibility(
          d, phi, [&](std::mt19937_64& g) { return random_value(sample_type, g, 4, 6).as_bag(); }, share,
          ctx.seed + round);
      probe.samples += r.samples;
      probe.verdict = r.verdict;
      probe.counterexample = r.counterexample;
    }
  } catch (const Error& err) {
    return {false, std::string("compatibility probe could not run: ") + err.what()};
  }
  if (probe.verdict == Verdict::Refuted) {
    return {false, "compatibility refuted by probe on " + to_string(*probe.counterexample)};
  }
  return {true, "annotated compatible(" + delta.name() + ", " + (fix.label.empty() ? "*" : fix.label) +
                    "), not refuted in " + std::to_string(probe.samples) + " samples"};
}

ExprPtr pa_site(const ExprPtr& e, const TypeEnv& env, const OptimizerContext& ctx, RulePass& pass) {
  AggregatorSpec outer;
  ExprPtr src;
  if (const auto* a = e->as<node::Aggregate>()) {
    outer = a->delta;
    src = a->src;
  } else if (const auto* r = e->as<node::ReduceByKey>()) {
    const auto* op = r->op->as<node::Const>();
    if (!op || op->value.kind() != ValueKind::Builtin || !op->value.builtin_applied().empty()) return e;
    const std::string& name = op->value.builtin_def().name;
    if (name != "min" && name != "max") return e;
    outer = AggregatorSpec::by_key(name);
    src = r->src;
  } else {
    return e;
  }
  const auto* fix = src->as<node::Fixpoint>();
  if (!fix || outer.kind == AggregatorKind::Identity) return e;
  auto skip = [&](std::string why) {
    pass.skipped.push_back({"PA", false, std::move(why), fragment(e), {}});
    return e;
  };
  if (fix->delta.kind != AggregatorKind::Distinct && fix->delta.kind != AggregatorKind::Identity) {
    return skip("the fixpoint already aggregates with " + fix->delta.name());
  }
  std::string reason;
  if (outer.kind == AggregatorKind::Distinct) {
    reason = "distinct is compatible with every body";
  } else {
    TypeExpr bag;
    try {
      bag = infer(env, src);
    } catch (const Error& err) {
      return skip(std::string("fixpoint does not typecheck: ") + err.what());
    }
    const Evidence ev = compatibility_evidence(outer, *fix, bag.elem(), env, ctx);
    if (!ev.ok) return skip(ev.reason);
    reason = ev.reason;
  }
  ExprPtr out = ex::fixpoint(outer, fix->seed, fix->phi, fix->label);
  verify("PA", env, out);
  pass.applied.push_back({"PA", true, reason, fragment(e), fragment(out)});
  return out;
}

bool key_local(const AggregatorSpec& d, const TypePath& path) {
  if (d.kind != AggregatorKind::ReduceByKey) return true;
  return Aggregator::by_key(d.op).key_local(path);
}

RulePass run_pass(ExprPtr& e, const TypeEnv& env, const std::function<ExprPtr(const ExprPtr&, const TypeEnv&, RulePass&)>& site) {
  RulePass pass;
  e = transform(e, env, [&](const ExprPtr& x, const TypeEnv& local) { return site(x, local, pass); });
  return pass;
}

void record(RewriteTrace& trace, const RulePass& pass, const char* rule, const char* none) {
  for (const auto& s : pass.applied) trace.steps.push_back(s);
  for (const auto& s : pass.skipped) trace.steps.push_back(s);
  if (pass.applied.empty() && pass.skipped.empty()) trace.steps.push_back({rule, false, none, {}, {}});
}

constexpr const char* kNoPfSite = "no filter over a fixpoint";
constexpr const char* kNoPjSite = "no join with a fixpoint";
constexpr const char* kNoPaSite = "no aggregation of a fixpoint result";

}  // namespace

bool is_syntactic_homomorphism(const Expr& lam) {
  const auto* l = lam.as<node::Lambda>();
  if (!l || l->cases.size() != 1 || !l->cases.front().pattern.is_var()) return false;
  const std::string& x = l->cases.front().pattern.name();
  std::function<bool(const Expr&)> hom = [&](const Expr& body) -> bool {
    if (const auto* v = body.as<node::Var>()) return v->name == x;
    if (const auto* f = body.as<node::Flatmap>()) return !occurs_free(*f->fn, x) && hom(*f->src);
    if (const auto* j = body.as<node::Join>()) {
      return (hom(*j->left) && !occurs_free(*j->right, x)) || (!occurs_free(*j->left, x) && hom(*j->right));
    }
    return false;
  };
  return hom(*l->cases.front().body);
}

ExprPtr inline_lets(const ExprPtr& e) {
  ExprPtr rebuilt = map_children(e, [](const ExprPtr& c, const std::vector<std::string>&) { return inline_lets(c); });
  const auto* let = rebuilt->as<node::Let>();
  if (!let) return rebuilt;
  ExprPtr bound = let->bound;
  if (const auto* f = bound->as<node::Fixpoint>(); f && f->label.empty()) {
    bound = ex::fixpoint(f->delta, f->seed, f->phi, let->name);
  }
  const std::size_t uses = count_free(let->body, let->name);
  if (uses == 0) return let->body;
  if (!bound->is<node::Lambda>() && uses > 1) return bound == let->bound ? rebuilt : ex::let(let->name, bound, let->body);
  try {
    return substitute(let->body, let->name, bound, free_variables(*bound));
  } catch (const Capture&) {
    return ex::let(let->name, bound, let->body);
  }
}

RewriteResult rewrite_pf(const ExprPtr& e, const OptimizerContext& ctx) {
  RewriteResult res{e, {}};
  bool any = false;
  for (int round = 0; round < 64; ++round) {
    RulePass pass = run_pass(res.expr, ctx.types, pf_site);
    for (const auto& s : pass.applied) res.trace.steps.push_back(s);
    if (pass.applied.empty()) {
      for (const auto& s : pass.skipped) res.trace.steps.push_back(s);
      if (!any && pass.skipped.empty()) res.trace.steps.push_back({"PF", false, kNoPfSite, {}, {}});
      break;
    }
    any = true;
  }
  return res;
}

RewriteResult rewrite_pj(const ExprPtr& e, const OptimizerContext& ctx) {
  RewriteResult res{e, {}};
  record(res.trace, run_pass(res.expr, ctx.types, pj_site), "PJ", kNoPjSite);
  return res;
}

RewriteResult rewrite_pa(const ExprPtr& e, const OptimizerContext& ctx) {
  RewriteResult res{e, {}};
  auto site = [&](const ExprPtr& x, const TypeEnv& env, RulePass& pass) { return pa_site(x, env, ctx, pass); };
  record(res.trace, run_pass(res.expr, ctx.types, site), "PA", kNoPaSite);
  return res;
}

Directives apply_pdist(const ExprPtr& e, const OptimizerContext& ctx, RewriteTrace* trace) {
  Directives out;
  auto note = [&](bool applied, std::string reason, const ExprPtr& at) {
    if (trace) trace->steps.push_back({"Pdist", applied, std::move(reason), fragment(at), {}});
  };
  transform(e, ctx.types, [&](const ExprPtr& x, const TypeEnv& env) {
    const auto* fix = x->as<node::Fixpoint>();
    if (!fix) return x;
    PlanDirective d;
    if (!is_syntactic_homomorphism(*fix->phi)) {
      d.reason = "warning: the body is not a syntactic homomorphism, keeping the global loop (P1)";
      note(false, d.reason, x);
      out[x.get()] = d;
      return x;
    }
    d.plan = Plan::P2;
    d.reason = "P2: the body is a homomorphism";
    try {
      const TypeExpr bag = infer(env, x);
      const Evidence ev = compatibility_evidence(fix->delta, *fix, bag.elem(), env, ctx);
      if (!ev.ok) {
        d.plan = Plan::P1;
        d.reason = "keeping the global loop (P1) for " + fix->delta.name() + ": " + ev.reason;
        note(false, d.reason, x);
        out[x.get()] = d;
        return x;
      }
      for (const auto& path : enumerate_paths(bag.elem())) {
        if (key_local(fix->delta, path) && preserves_path(env, fix->phi, bag.elem(), bag.bag_kind(), path)) {
          d.plan = Plan::P2Repartitioned;
          d.key = path;
          d.reason = "P2-repartitioned on " + to_string(path) + ": the body never changes that component";
          break;
        }
      }
    } catch (const Error& err) {
      if (fix->delta.kind != AggregatorKind::Distinct && fix->delta.kind != AggregatorKind::Identity) {
        d.plan = Plan::P1;
        d.key.reset();
        d.reason = std::string("keeping the global loop (P1): ") + err.what();
        note(false, d.reason, x);
        out[x.get()] = d;
        return x;
      }
    }
    note(true, d.reason, x);
    out[x.get()] = d;
    return x;
  });
  if (trace && out.empty()) trace->steps.push_back({"Pdist", false, "no fixpoint to distribute", {}, {}});
  return out;
}

Optimized optimize(const ExprPtr& e, const OptimizerContext& ctx) {
  Optimized res;
  res.expr = inline_lets(e);
  infer(ctx.types, res.expr);
  for (auto rule : {rewrite_pf, rewrite_pj, rewrite_pa}) {
    RewriteResult r = rule(res.expr, ctx);
    res.expr = r.expr;
    res.trace.append(r.trace);
    verify("optimize", ctx.types, res.expr);
  }
  res.directives = apply_pdist(res.expr, ctx, &res.trace);
  return res;
}

}  // namespace mumonoids
