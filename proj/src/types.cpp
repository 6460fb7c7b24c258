#include "mumonoids/types.hpp"

#include <algorithm>

#include "mumonoids/error.hpp"

namespace mumonoids {

struct TypeNode {
  TypeKind kind;
  std::string name;             // Basic
  std::vector<SumCase> cases;   // Sum, sorted by name
  TypeExpr a, b;                // bag element; function domain and codomain
  int rigid = 0;
};

TypeExpr::TypeExpr() = default;

TypeExpr TypeExpr::basic(std::string name) {
  return TypeExpr(std::make_shared<const TypeNode>(TypeNode{TypeKind::Basic, std::move(name), {}, {}, {}, 0}));
}

TypeExpr TypeExpr::boolean() {
  static const TypeExpr t = sum({SumCase{std::string(kFalseCtor), {}}, SumCase{std::string(kTrueCtor), {}}});
  return t;
}

TypeExpr TypeExpr::sum(std::vector<SumCase> cases) {
  std::sort(cases.begin(), cases.end(), [](const SumCase& x, const SumCase& y) { return x.name < y.name; });
  for (std::size_t i = 1; i < cases.size(); ++i) {
    if (cases[i].name == cases[i - 1].name) {
      throw_type_error("sum", "constructor " + cases[i].name + " appears twice in a sum type");
    }
  }
  if (cases.empty()) throw_type_error("sum", "a sum type needs at least one constructor");
  return TypeExpr(std::make_shared<const TypeNode>(TypeNode{TypeKind::Sum, {}, std::move(cases), {}, {}, 0}));
}

TypeExpr TypeExpr::constructed(std::string name, std::vector<TypeExpr> params) {
  return sum({SumCase{std::move(name), std::move(params)}});
}

TypeExpr TypeExpr::tuple(std::vector<TypeExpr> params) { return constructed(std::string(kTupleCtor), std::move(params)); }

TypeExpr TypeExpr::bag(BagKind kind, TypeExpr elem) {
  if (kind == BagKind::Distributed && contains_dist_bag(elem)) {
    throw_type_error("bag", "distributed bags cannot be nested: " + to_string(elem));
  }
  const TypeKind k = kind == BagKind::Local ? TypeKind::LocalBag : TypeKind::DistBag;
  return TypeExpr(std::make_shared<const TypeNode>(TypeNode{k, {}, {}, std::move(elem), {}, 0}));
}

TypeExpr TypeExpr::func(TypeExpr from, TypeExpr to) {
  return TypeExpr(
      std::make_shared<const TypeNode>(TypeNode{TypeKind::Func, {}, {}, std::move(from), std::move(to), 0}));
}

TypeExpr TypeExpr::rigid(int id) {
  return TypeExpr(std::make_shared<const TypeNode>(TypeNode{TypeKind::Rigid, {}, {}, {}, {}, id}));
}

TypeKind TypeExpr::kind() const { return node_ ? node_->kind : TypeKind::Bottom; }

BagKind TypeExpr::bag_kind() const {
  if (kind() == TypeKind::DistBag) return BagKind::Distributed;
  if (kind() == TypeKind::LocalBag) return BagKind::Local;
  throw Error(ErrorKind::Internal, "type", "bag_kind of non-bag type " + to_string(*this));
}

static const TypeNode& expect(const std::shared_ptr<const TypeNode>& n, TypeKind k, const TypeExpr& self) {
  if (!n || n->kind != k) throw Error(ErrorKind::Internal, "type", "unexpected type shape " + to_string(self));
  return *n;
}

const std::string& TypeExpr::basic_name() const { return expect(node_, TypeKind::Basic, *this).name; }
const std::vector<SumCase>& TypeExpr::cases() const { return expect(node_, TypeKind::Sum, *this).cases; }

const SumCase* TypeExpr::find_case(std::string_view name) const {
  if (kind() != TypeKind::Sum) return nullptr;
  for (const auto& c : node_->cases)
    if (c.name == name) return &c;
  return nullptr;
}

const SumCase* TypeExpr::single_case() const {
  if (kind() != TypeKind::Sum || node_->cases.size() != 1) return nullptr;
  return &node_->cases.front();
}

bool TypeExpr::is_tuple(std::size_t arity) const {
  const SumCase* c = single_case();
  return c && c->name == kTupleCtor && c->params.size() == arity;
}

const TypeExpr& TypeExpr::elem() const {
  if (!is_bag()) throw Error(ErrorKind::Internal, "type", "elem of non-bag type " + to_string(*this));
  return node_->a;
}
const TypeExpr& TypeExpr::from() const { return expect(node_, TypeKind::Func, *this).a; }
const TypeExpr& TypeExpr::to() const { return expect(node_, TypeKind::Func, *this).b; }
int TypeExpr::rigid_id() const { return expect(node_, TypeKind::Rigid, *this).rigid; }

int compare(const TypeExpr& x, const TypeExpr& y) {
  if (x.node_ == y.node_) return 0;
  const auto kx = x.kind();
  const auto ky = y.kind();
  if (kx != ky) return kx < ky ? -1 : 1;
  switch (kx) {
    case TypeKind::Bottom: return 0;
    case TypeKind::Basic: return x.basic_name().compare(y.basic_name());
    case TypeKind::Rigid: return x.rigid_id() < y.rigid_id() ? -1 : (x.rigid_id() > y.rigid_id() ? 1 : 0);
    case TypeKind::LocalBag:
    case TypeKind::DistBag: return compare(x.elem(), y.elem());
    case TypeKind::Func: {
      if (int c = compare(x.from(), y.from()); c != 0) return c;
      return compare(x.to(), y.to());
    }
    case TypeKind::Sum: {
      const auto& cx = x.cases();
      const auto& cy = y.cases();
      if (cx.size() != cy.size()) return cx.size() < cy.size() ? -1 : 1;
      for (std::size_t i = 0; i < cx.size(); ++i) {
        if (int c = cx[i].name.compare(cy[i].name); c != 0) return c;
        if (cx[i].params.size() != cy[i].params.size()) return cx[i].params.size() < cy[i].params.size() ? -1 : 1;
        for (std::size_t j = 0; j < cx[i].params.size(); ++j) {
          if (int c = compare(cx[i].params[j], cy[i].params[j]); c != 0) return c;
        }
      }
      return 0;
    }
  }
  return 0;
}

// ---- printing ----

static void print_type(std::string& out, const TypeExpr& t, bool in_function_position);

static void print_params(std::string& out, const std::vector<TypeExpr>& params) {
  out += '(';
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out += ',';
    print_type(out, params[i], false);
  }
  out += ')';
}

static void print_type(std::string& out, const TypeExpr& t, bool in_function_position) {
  switch (t.kind()) {
    case TypeKind::Bottom: out += "Nothing"; return;
    case TypeKind::Basic: out += t.basic_name(); return;
    case TypeKind::Rigid: out += "'a" + std::to_string(t.rigid_id()); return;
    case TypeKind::LocalBag:
      out += "Bag_l<";
      print_type(out, t.elem(), false);
      out += '>';
      return;
    case TypeKind::DistBag:
      out += "Bag_d<";
      print_type(out, t.elem(), false);
      out += '>';
      return;
    case TypeKind::Func:
      if (in_function_position) out += '(';
      print_type(out, t.from(), true);
      out += "->";
      print_type(out, t.to(), false);
      if (in_function_position) out += ')';
      return;
    case TypeKind::Sum: {
      if (t == TypeExpr::boolean()) {
        out += "Bool";
        return;
      }
      const auto& cases = t.cases();
      const bool wrap = in_function_position && cases.size() > 1;
      if (wrap) out += '(';
      for (std::size_t i = 0; i < cases.size(); ++i) {
        if (i) out += '|';
        const auto& c = cases[i];
        if (c.name != kTupleCtor) out += c.name;
        if (!c.params.empty() || c.name == kTupleCtor) {
          print_params(out, c.params);
        } else if (c.name != kTrueCtor && c.name != kFalseCtor) {
          out += "()";
        }
      }
      if (wrap) out += ')';
      return;
    }
  }
}

std::string to_string(const TypeExpr& t) {
  std::string out;
  print_type(out, t, false);
  return out;
}

bool contains_dist_bag(const TypeExpr& t) {
  switch (t.kind()) {
    case TypeKind::DistBag: return true;
    case TypeKind::LocalBag: return contains_dist_bag(t.elem());
    case TypeKind::Func: return contains_dist_bag(t.from()) || contains_dist_bag(t.to());
    case TypeKind::Sum:
      for (const auto& c : t.cases())
        for (const auto& p : c.params)
          if (contains_dist_bag(p)) return true;
      return false;
    default: return false;
  }
}

bool contains_rigid(const TypeExpr& t) {
  switch (t.kind()) {
    case TypeKind::Rigid: return true;
    case TypeKind::LocalBag:
    case TypeKind::DistBag: return contains_rigid(t.elem());
    case TypeKind::Func: return contains_rigid(t.from()) || contains_rigid(t.to());
    case TypeKind::Sum:
      for (const auto& c : t.cases())
        for (const auto& p : c.params)
          if (contains_rigid(p)) return true;
      return false;
    default: return false;
  }
}

// ---- environments ----

const TypeExpr* TypeEnv::find(std::string_view name) const {
  auto it = vars_.find(name);
  return it == vars_.end() ? nullptr : &it->second;
}

TypeEnv TypeEnv::disjoint_union(const TypeEnv& a, const TypeEnv& b) {
  TypeEnv out = a;
  for (const auto& [k, v] : b.vars_) {
    if (out.vars_.count(k)) throw_type_error("pattern", "variable " + k + " is bound twice");
    out.vars_.emplace(k, v);
  }
  return out;
}

TypeEnv TypeEnv::override_with(const TypeEnv& a, const TypeEnv& b) {
  TypeEnv out = a;
  for (const auto& [k, v] : b.vars_) out.vars_.insert_or_assign(k, v);
  return out;
}

// ---- matching ----

static std::string pattern_text(const Pattern& p) {
  if (p.is_var()) return p.name();
  std::string s = p.name() + "(";
  for (std::size_t i = 0; i < p.subs().size(); ++i) {
    if (i) s += ", ";
    s += pattern_text(p.subs()[i]);
  }
  return s + ")";
}

TypeEnv match_type(const Pattern& p, const TypeExpr& t) {
  if (p.is_var()) {
    TypeEnv env;
    env.bind(p.name(), t);
    return env;
  }
  std::vector<TypeExpr> params;
  if (t.kind() == TypeKind::Bottom) {
    params.assign(p.subs().size(), TypeExpr::bottom());
  } else {
    const SumCase* c = t.find_case(p.name());
    if (!c || c->params.size() != p.subs().size()) {
      throw_type_error("match", "pattern " + pattern_text(p) + " does not match type " + to_string(t));
    }
    params = c->params;
  }
  TypeEnv env;
  for (std::size_t i = 0; i < params.size(); ++i) {
    env = TypeEnv::disjoint_union(env, match_type(p.subs()[i], params[i]));
  }
  return env;
}

std::optional<TypeExpr> narrow_to_pattern(const Pattern& p, const TypeExpr& t) {
  if (p.is_var() || t.kind() == TypeKind::Bottom) return t;
  const SumCase* c = t.find_case(p.name());
  if (!c || c->params.size() != p.subs().size()) return std::nullopt;
  std::vector<TypeExpr> params;
  for (std::size_t i = 0; i < c->params.size(); ++i) {
    auto n = narrow_to_pattern(p.subs()[i], c->params[i]);
    if (!n) return std::nullopt;
    params.push_back(*n);
  }
  return TypeExpr::constructed(c->name, std::move(params));
}

// ---- combination and subtyping ----

std::optional<TypeExpr> try_sum_combine(const TypeExpr& a, const TypeExpr& b) {
  if (a.kind() == TypeKind::Bottom) return b;
  if (b.kind() == TypeKind::Bottom) return a;
  if (a.kind() == TypeKind::Sum && b.kind() == TypeKind::Sum) {
    std::vector<SumCase> merged = a.cases();
    for (const auto& cb : b.cases()) {
      auto it = std::find_if(merged.begin(), merged.end(), [&](const SumCase& c) { return c.name == cb.name; });
      if (it == merged.end()) {
        merged.push_back(cb);
        continue;
      }
      if (it->params.size() != cb.params.size()) return std::nullopt;
      for (std::size_t i = 0; i < cb.params.size(); ++i) {
        auto p = try_sum_combine(it->params[i], cb.params[i]);
        if (!p) return std::nullopt;
        it->params[i] = *p;
      }
    }
    return TypeExpr::sum(std::move(merged));
  }
  if (a.kind() == b.kind() && a.is_bag()) {
    auto e = try_sum_combine(a.elem(), b.elem());
    if (!e) return std::nullopt;
    return TypeExpr::bag(a.bag_kind(), *e);
  }
  if (a == b) return a;
  return std::nullopt;
}

TypeExpr sum_combine(const TypeExpr& a, const TypeExpr& b) {
  auto r = try_sum_combine(a, b);
  if (!r) throw_type_error("sum", "types " + to_string(a) + " and " + to_string(b) + " cannot be combined");
  return *r;
}

bool subtype(const TypeExpr& a, const TypeExpr& b) {
  auto r = try_sum_combine(a, b);
  return r && *r == b;
}

// ---- paths ----

std::string to_string(const TypePath& path) {
  if (path.empty()) return "<root>";
  std::string s;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) s += '.';
    s += path[i].ctor + "#" + std::to_string(path[i].index);
  }
  return s;
}

static bool find_path(const Pattern& p, std::string_view var, TypePath& out) {
  if (p.is_var()) return p.name() == var;
  for (std::size_t i = 0; i < p.subs().size(); ++i) {
    out.push_back(PathStep{p.name(), i});
    if (find_path(p.subs()[i], var, out)) return true;
    out.pop_back();
  }
  return false;
}

TypePath pattern_path(const Pattern& p, std::string_view var) {
  TypePath path;
  if (!find_path(p, var, path)) {
    throw Error(ErrorKind::InvalidArgument, "path", "variable " + std::string(var) + " does not occur in pattern");
  }
  return path;
}

std::optional<TypeExpr> type_at_path(const TypeExpr& t, const TypePath& path) {
  TypeExpr cur = t;
  for (const auto& step : path) {
    const SumCase* c = cur.find_case(step.ctor);
    if (!c || step.index >= c->params.size()) return std::nullopt;
    TypeExpr next = c->params[step.index];
    cur = next;
  }
  return cur;
}

std::optional<Value> value_at_path(const Value& v, const TypePath& path) {
  Value cur = v;
  for (const auto& step : path) {
    if (!cur.is_ctor(step.ctor) || step.index >= cur.args().size()) return std::nullopt;
    Value next = cur.args()[step.index];
    cur = next;
  }
  return cur;
}

static TypeExpr replace_at(const TypeExpr& t, const TypePath& path, std::size_t depth, int rigid_id) {
  if (depth == path.size()) return TypeExpr::rigid(rigid_id);
  const auto& step = path[depth];
  const SumCase* c = t.find_case(step.ctor);
  if (!c || step.index >= c->params.size()) {
    throw Error(ErrorKind::InvalidArgument, "path",
                "path " + to_string(path) + " does not address a node of " + to_string(t));
  }
  std::vector<SumCase> cases = t.cases();
  for (auto& cc : cases) {
    if (cc.name == step.ctor) cc.params[step.index] = replace_at(cc.params[step.index], path, depth + 1, rigid_id);
  }
  return TypeExpr::sum(std::move(cases));
}

TypeExpr build_param_type(const TypeExpr& t, const TypePath& path, int rigid_id) {
  return replace_at(t, path, 0, rigid_id);
}

static void enumerate(const TypeExpr& t, TypePath& prefix, std::vector<TypePath>& out) {
  out.push_back(prefix);
  if (t.kind() != TypeKind::Sum) return;
  for (const auto& c : t.cases()) {
    for (std::size_t i = 0; i < c.params.size(); ++i) {
      prefix.push_back(PathStep{c.name, i});
      enumerate(c.params[i], prefix, out);
      prefix.pop_back();
    }
  }
}

std::vector<TypePath> enumerate_paths(const TypeExpr& t) {
  std::vector<TypePath> out;
  TypePath prefix;
  enumerate(t, prefix, out);
  return out;
}

bool inhabits(const Value& v, const TypeExpr& t) {
  switch (t.kind()) {
    case TypeKind::Bottom: return false;
    case TypeKind::Rigid: return true;
    case TypeKind::Basic: {
      const auto& n = t.basic_name();
      if (n == "Int") return v.kind() == ValueKind::Int;
      if (n == "Float") return v.kind() == ValueKind::Float;
      if (n == "String") return v.kind() == ValueKind::String;
      return false;
    }
    case TypeKind::Func: return v.is_function();
    case TypeKind::LocalBag:
    case TypeKind::DistBag: {
      if (!v.is_bag()) return false;
      for (const auto& [e, c] : v.as_bag().entries())
        if (!inhabits(e, t.elem())) return false;
      return true;
    }
    case TypeKind::Sum: {
      if (v.kind() != ValueKind::Constructed) return false;
      const SumCase* c = t.find_case(v.ctor_name());
      if (!c || c->params.size() != v.args().size()) return false;
      for (std::size_t i = 0; i < c->params.size(); ++i)
        if (!inhabits(v.args()[i], c->params[i])) return false;
      return true;
    }
  }
  return false;
}

}  // namespace mumonoids
