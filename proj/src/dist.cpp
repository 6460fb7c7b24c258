#include "mumonoids/dist.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>

#include "mumonoids/error.hpp"
#include "mumonoids/optimizer.hpp"
#include "mumonoids/typecheck.hpp"

namespace mumonoids {

std::string Partitioner::describe() const {
  switch (kind) {
    case Kind::RoundRobin: return fmt::format("round-robin({})", seed);
    case Kind::ByKeyHash: return "by-key-hash(" + to_string(path) + ")";
    case Kind::Explicit: return "explicit";
  }
  return "?";
}

std::uint64_t PartitionedBag::records() const {
  std::uint64_t n = 0;
  for (const auto& p : partitions) n += p.size();
  return n;
}

PartitionedBag partition(const Bag& b, std::size_t p, const Partitioner& strategy) {
  if (p < 1) throw Error(ErrorKind::InvalidArgument, "partition", "partition count must be at least 1");
  std::vector<BagBuilder> parts(p);
  switch (strategy.kind) {
    case Partitioner::Kind::Explicit:
      throw Error(ErrorKind::InvalidArgument, "partition", "explicit partitions are built with partition_explicit");
    case Partitioner::Kind::RoundRobin: {
      std::vector<const Value*> records;
      records.reserve(b.size());
      for (const auto& [v, c] : b.entries())
        for (std::uint64_t k = 0; k < c; ++k) records.push_back(&v);
      std::mt19937_64 rng(strategy.seed);
      std::shuffle(records.begin(), records.end(), rng);
      for (std::size_t i = 0; i < records.size(); ++i) parts[i % p].add(*records[i]);
      break;
    }
    case Partitioner::Kind::ByKeyHash:
      for (const auto& [v, c] : b.entries()) {
        auto key = value_at_path(v, strategy.path);
        if (!key) {
          throw Error(ErrorKind::InvalidArgument, "partition",
                      "record " + to_string(v) + " has no component at " + to_string(strategy.path));
        }
        parts[fnv1a(to_string(*key)) % p].add(v, c);
      }
      break;
  }
  PartitionedBag out;
  out.partitioner = strategy;
  for (auto& pb : parts) out.partitions.push_back(pb.build());
  return out;
}

PartitionedBag partition_explicit(std::vector<Bag> parts) {
  if (parts.empty()) throw Error(ErrorKind::InvalidArgument, "partition", "partition count must be at least 1");
  return {std::move(parts), Partitioner::explicit_parts()};
}

std::string to_string(Plan p) {
  switch (p) {
    case Plan::P1: return "P1";
    case Plan::P2: return "P2";
    case Plan::P2Repartitioned: return "P2-repartitioned";
  }
  return "?";
}

std::optional<Plan> parse_plan(std::string_view text) {
  if (text == "p1" || text == "P1") return Plan::P1;
  if (text == "p2" || text == "P2") return Plan::P2;
  if (text == "p2r" || text == "P2-repartitioned" || text == "p2-repartitioned") return Plan::P2Repartitioned;
  return std::nullopt;
}

void TransferReport::total() { records_shuffled = seed_distribution + iteration_merge + final_merge; }

std::string TransferReport::to_text() const {
  std::string iters;
  for (std::size_t i = 0; i < partition_iterations.size(); ++i) {
    iters += (i ? "," : "") + std::to_string(partition_iterations[i]);
  }
  return fmt::format(
      "plan: {}\nlabel: {}\npartitions: {}\niterations: {}\npartition_iterations: {}\nseed_distribution: {}\n"
      "iteration_merge: {}\nfinal_merge: {}\nrecords_shuffled: {}\nresult_records: {}\n",
      to_string(plan), label.empty() ? "-" : label, partitions, iterations, iters.empty() ? "-" : iters,
      seed_distribution, iteration_merge, final_merge, records_shuffled, result_records);
}

namespace {

void collect_bag_refs(const Value& fn, std::set<const ValueNode*>& seen, std::uint64_t& total) {
  if (fn.kind() == ValueKind::Builtin) {
    for (const auto& a : fn.builtin_applied()) {
      if (a.is_bag() && seen.insert(a.node()).second) total += a.as_bag().size();
    }
    return;
  }
  if (fn.kind() != ValueKind::Closure) return;
  for (const auto& name : free_variables(*fn.closure_lambda())) {
    const Value* v = fn.closure_env()->lookup(name);
    if (!v || !seen.insert(v->node()).second) continue;
    if (v->is_bag()) total += v->as_bag().size();
    else if (v->is_function()) collect_bag_refs(*v, seen, total);
  }
}

template <class F>
void run_tasks(std::size_t n, Schedule schedule, F&& task) {
  std::vector<std::exception_ptr> errors(n);
  auto one = [&](std::size_t i) {
    try {
      task(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  switch (schedule) {
    case Schedule::Serial:
      for (std::size_t i = 0; i < n; ++i) one(i);
      break;
    case Schedule::Reversed:
      for (std::size_t i = n; i-- > 0;) one(i);
      break;
    case Schedule::Parallel:
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) one(static_cast<std::size_t>(i));
      break;
  }
  // Report the failure of the lowest partition so errors do not depend on the schedule.
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// N copies of a global merge input; merges of element-wise aggregators stay local.
std::uint64_t merge_charge(const Aggregator& delta, std::size_t n, std::uint64_t records) {
  return delta.is_global() ? n * records : 0;
}

struct LocalLoop {
  Bag result;
  std::size_t iterations = 0;
};

// Semi-naive μ^δ: φ only sees what the previous round added to the accumulator.
LocalLoop local_fixpoint(const Bag& seed, const Value& phi, const Aggregator& delta, const EvalLimits& limits) {
  Evaluator ev(limits);
  Bag frontier = delta.apply(seed);
  Bag acc = frontier;
  std::size_t it = 0;
  while (true) {
    if (it == limits.max_fixpoint_iterations) throw IterationLimitError(it);
    ++it;
    const Bag produced = ev.apply_to_bag(phi, Value::bag(frontier));
    Bag next = delta.combine(acc, produced);
    ev.check_cardinality(next.size(), "fixpoint");
    if (next == acc) break;
    frontier = bag_difference(next, acc);
    acc = std::move(next);
  }
  return {std::move(acc), it};
}

std::vector<LocalLoop> run_local_loops(const PartitionedBag& r, const Value& phi, const Aggregator& delta,
                                       const PlanOptions& opts) {
  std::vector<LocalLoop> loops(r.count());
  run_tasks(r.count(), opts.schedule,
            [&](std::size_t i) { loops[i] = local_fixpoint(r.partitions[i], phi, delta, opts.limits); });
  return loops;
}

void check_homomorphic(const Value& phi) {
  if (phi.kind() == ValueKind::Closure && !is_syntactic_homomorphism(*phi.closure_lambda())) {
    throw Error(ErrorKind::InvalidArgument, "plan",
                "per-partition fixpoints need a body that is a homomorphism in its argument");
  }
}

}  // namespace

std::uint64_t referenced_bag_records(const Value& phi) {
  std::set<const ValueNode*> seen;
  std::uint64_t total = 0;
  collect_bag_refs(phi, seen, total);
  return total;
}

PlanResult run_plan_p1(const PartitionedBag& r, const Value& phi, const Aggregator& delta, const PlanOptions& opts) {
  opts.limits.validate();
  const std::size_t n = r.count();
  TransferReport rep;
  rep.plan = Plan::P1;
  rep.partitions = n;
  const Bag seed = r.merged();
  if (seed.empty()) {
    rep.total();
    return {Bag(), rep};
  }
  rep.seed_distribution = (n - 1) * referenced_bag_records(phi);
  rep.iteration_merge += merge_charge(delta, n, seed.size());
  Bag frontier = delta.apply(seed);
  Bag acc = frontier;
  const Partitioner spread = Partitioner::round_robin(r.partitioner.seed);
  std::size_t it = 0;
  while (true) {
    if (it == opts.limits.max_fixpoint_iterations) throw IterationLimitError(it);
    ++it;
    const PartitionedBag parts = partition(frontier, n, spread);
    std::vector<Bag> produced(n);
    run_tasks(n, opts.schedule, [&](std::size_t i) {
      Evaluator ev(opts.limits);
      produced[i] = ev.apply_to_bag(phi, Value::bag(parts.partitions[i]));
    });
    const Bag p = bag_union(produced);
    rep.iteration_merge += merge_charge(delta, n, acc.size() + p.size());
    Bag next = delta.combine(acc, p);
    Evaluator(opts.limits).check_cardinality(next.size(), "fixpoint");
    if (next == acc) break;
    frontier = delta.apply(p);
    acc = std::move(next);
  }
  rep.iterations = it;
  rep.result_records = acc.size();
  rep.total();
  return {std::move(acc), rep};
}

PlanResult run_plan_p2(const PartitionedBag& r, const Value& phi, const Aggregator& delta, const PlanOptions& opts) {
  opts.limits.validate();
  check_homomorphic(phi);
  const std::size_t n = r.count();
  TransferReport rep;
  rep.plan = Plan::P2;
  rep.partitions = n;
  if (r.records() == 0) {
    rep.partition_iterations.assign(n, 0);
    rep.total();
    return {Bag(), rep};
  }
  rep.seed_distribution = (n - 1) * referenced_bag_records(phi);
  const auto loops = run_local_loops(r, phi, delta, opts);
  std::vector<Bag> results;
  for (const auto& l : loops) {
    rep.partition_iterations.push_back(l.iterations);
    rep.iterations = std::max(rep.iterations, l.iterations);
    results.push_back(l.result);
  }
  const Bag all = bag_union(results);
  if (n > 1) rep.final_merge = merge_charge(delta, n, all.size());
  Bag result = n > 1 ? delta.apply(all) : all;
  rep.result_records = result.size();
  rep.total();
  return {std::move(result), rep};
}

PlanResult run_plan_p2_repartitioned(const PartitionedBag& r, const Value& phi, const Aggregator& delta,
                                     const TypePath& key_path, const PlanOptions& opts) {
  opts.limits.validate();
  check_homomorphic(phi);
  if (!delta.key_local(key_path)) {
    throw Error(ErrorKind::InvalidArgument, "plan",
                delta.name() + " merges elements that differ at " + to_string(key_path) +
                    ", so partition results cannot simply be concatenated");
  }
  const std::size_t n = r.count();
  TransferReport rep;
  rep.plan = Plan::P2Repartitioned;
  rep.partitions = n;
  const bool already = r.partitioner.kind == Partitioner::Kind::ByKeyHash && r.partitioner.path == key_path;
  const PartitionedBag keyed = already ? r : partition(r.merged(), n, Partitioner::by_key_hash(key_path));
  if (keyed.records() == 0) {
    rep.partition_iterations.assign(n, 0);
    rep.total();
    return {Bag(), rep};
  }
  if (!already && n > 1) rep.seed_distribution += r.records();
  rep.seed_distribution += (n - 1) * referenced_bag_records(phi);
  const auto loops = run_local_loops(keyed, phi, delta, opts);
  std::vector<Bag> results;
  std::size_t distinct_total = 0;
  for (const auto& l : loops) {
    rep.partition_iterations.push_back(l.iterations);
    rep.iterations = std::max(rep.iterations, l.iterations);
    distinct_total += l.result.distinct_size();
    results.push_back(l.result);
  }
  Bag result = bag_union(results);
  if (result.distinct_size() != distinct_total) {
    throw Error(ErrorKind::Internal, "repartition",
                "partition results overlap although the body preserves " + to_string(key_path));
  }
  rep.result_records = result.size();
  rep.total();
  return {std::move(result), rep};
}

std::optional<TypePath> find_repartition_key(const TypeEnv& env, const ExprPtr& phi, const TypeExpr& elem,
                                             BagKind kind) {
  for (const auto& path : enumerate_paths(elem)) {
    if (preserves_path(env, phi, elem, kind, path)) return path;
  }
  return std::nullopt;
}

ShapeCost account_join_shapes(const ShapeNode& root, std::size_t n_partitions) {
  ShapeCost cost;
  auto visit = [&](auto&& self, const ShapeNode& s) -> void {
    for (const auto& c : s.children) self(self, c);
    auto charge = [&](std::string what, std::uint64_t records) {
      cost.total += records;
      cost.charges.push_back({std::move(what), records});
    };
    auto child_sizes = [&] {
      std::uint64_t t = 0;
      for (const auto& c : s.children) t += c.size;
      return t;
    };
    switch (s.kind) {
      case ShapeNode::Kind::Join: charge("join", child_sizes()); break;
      case ShapeNode::Kind::Cogroup: charge("cogroup", child_sizes()); break;
      case ShapeNode::Kind::GroupBy: charge("groupBy", child_sizes()); break;
      case ShapeNode::Kind::Distinct: charge("distinct", n_partitions * child_sizes()); break;
      case ShapeNode::Kind::Fixpoint: charge("fixpoint", n_partitions * s.size); break;
      case ShapeNode::Kind::Input:
      case ShapeNode::Kind::Local: break;
    }
  };
  visit(visit, root);
  return cost;
}

namespace {

struct ShapeBuilder {
  EvalLimits limits;
  std::map<std::string, ShapeNode, std::less<>> named;

  std::uint64_t size_of(const ExprPtr& e, const EnvPtr& env) const {
    const Value v = eval(env, e, limits);
    return v.is_bag() ? v.as_bag().size() : 0;
  }

  ShapeNode build(const ExprPtr& e, const EnvPtr& env) {
    using K = ShapeNode::Kind;
    if (const auto* let = e->as<node::Let>()) {
      const Value bound = eval(env, let->bound, limits);
      auto saved = named;
      if (bound.is_bag()) named.insert_or_assign(let->name, build(let->bound, env));
      else named.erase(let->name);
      ShapeNode body = build(let->body, bind_value(env, let->name, bound));
      named = std::move(saved);
      return body;
    }
    if (const auto* v = e->as<node::Var>()) {
      if (auto it = named.find(v->name); it != named.end()) return it->second;
      return ShapeNode::input(v->name, size_of(e, env));
    }
    const std::uint64_t size = size_of(e, env);
    if (const auto* j = e->as<node::Join>()) return ShapeNode::node(K::Join, size, {build(j->left, env), build(j->right, env)});
    if (const auto* c = e->as<node::Cogroup>()) {
      return ShapeNode::node(K::Cogroup, size, {build(c->left, env), build(c->right, env)});
    }
    if (const auto* r = e->as<node::ReduceByKey>()) return ShapeNode::node(K::GroupBy, size, {build(r->src, env)});
    if (const auto* f = e->as<node::Fixpoint>()) return ShapeNode::node(K::Fixpoint, size, {build(f->seed, env)});
    if (const auto* f = e->as<node::Flatmap>()) return ShapeNode::node(K::Local, size, {build(f->src, env)});
    if (const auto* d = e->as<node::Dist>()) return ShapeNode::node(K::Local, size, {build(d->src, env)});
    if (const auto* a = e->as<node::Aggregate>()) {
      const K k = a->delta.kind == AggregatorKind::Distinct      ? K::Distinct
                  : a->delta.kind == AggregatorKind::ReduceByKey ? K::GroupBy
                                                                 : K::Local;
      return ShapeNode::node(k, size, {build(a->src, env)});
    }
    return ShapeNode::input({}, size);
  }
};

}  // namespace

ShapeNode shape_of(const ExprPtr& e, const EnvPtr& env, const EvalLimits& limits) {
  ShapeBuilder b{limits, {}};
  return b.build(e, env);
}

std::uint64_t DistributedRun::records_shuffled() const {
  std::uint64_t t = 0;
  for (const auto& r : reports) t += r.records_shuffled;
  return t;
}

DistributedRun run_distributed(const ExprPtr& e, const EnvPtr& env, const Directives& directives,
                               const ClusterConfig& cluster, Plan fallback, const EvalLimits& limits) {
  DistributedRun run;
  const std::size_t n = cluster.effective_partitions();
  PlanOptions opts{limits, cluster.schedule};
  Evaluator ev(limits);
  ev.set_fixpoint_handler([&](const FixpointCall& call) {
    PlanDirective d{fallback, {}, {}};
    if (auto it = directives.find(&call.expr); it != directives.end()) d = it->second;
    if (d.plan == Plan::P2Repartitioned && (!d.key || !call.delta.key_local(*d.key))) {
      d.plan = Plan::P2;
    }
    if (d.plan != Plan::P1 && call.phi.kind() == ValueKind::Closure &&
        !is_syntactic_homomorphism(*call.phi.closure_lambda())) {
      d.plan = Plan::P1;
    }
    const PartitionedBag parts = partition(call.seed, n, Partitioner::round_robin(cluster.seed));
    PlanResult r = d.plan == Plan::P1   ? run_plan_p1(parts, call.phi, call.delta, opts)
                   : d.plan == Plan::P2 ? run_plan_p2(parts, call.phi, call.delta, opts)
                                        : run_plan_p2_repartitioned(parts, call.phi, call.delta, *d.key, opts);
    if (const auto* f = call.expr.as<node::Fixpoint>()) r.report.label = f->label;
    run.reports.push_back(r.report);
    return std::move(r.result);
  });
  run.result = ev.eval(e, env);
  return run;
}

}  // namespace mumonoids
