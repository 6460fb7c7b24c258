#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mumonoids/aggregation.hpp"
#include "mumonoids/eval.hpp"
#include "mumonoids/expr.hpp"
#include "mumonoids/types.hpp"
#include "mumonoids/value.hpp"

namespace mumonoids {

// How records are assigned to partitions.
struct Partitioner {
  enum class Kind { RoundRobin, ByKeyHash, Explicit };
  Kind kind = Kind::RoundRobin;
  std::uint64_t seed = 0;  // RoundRobin: shuffles records before dealing them out
  TypePath path;           // ByKeyHash: the component whose hash picks the partition

  static Partitioner round_robin(std::uint64_t seed) { return {Kind::RoundRobin, seed, {}}; }
  static Partitioner by_key_hash(TypePath path) { return {Kind::ByKeyHash, 0, std::move(path)}; }
  static Partitioner explicit_parts() { return {Kind::Explicit, 0, {}}; }
  std::string describe() const;
};

// A bag split as R1 | R2 | ... | Rp.
struct PartitionedBag {
  std::vector<Bag> partitions;
  Partitioner partitioner;

  std::size_t count() const { return partitions.size(); }
  Bag merged() const { return bag_union(partitions); }
  std::uint64_t records() const;
};

PartitionedBag partition(const Bag& b, std::size_t p, const Partitioner& strategy);
// Wraps caller-chosen partitions; at least one is required.
PartitionedBag partition_explicit(std::vector<Bag> parts);

enum class Plan { P1, P2, P2Repartitioned };
std::string to_string(Plan p);
std::optional<Plan> parse_plan(std::string_view text);

// Execution order of independent per-partition tasks. Results and reports
// must not depend on it.
enum class Schedule { Serial, Parallel, Reversed };

// Records moved across partitions, in record counts.
struct TransferReport {
  Plan plan = Plan::P1;
  std::string label;
  std::size_t partitions = 1;
  std::size_t iterations = 0;  // P1: global loop rounds; P2: the longest local loop
  std::vector<std::size_t> partition_iterations;
  std::uint64_t seed_distribution = 0;
  std::uint64_t iteration_merge = 0;
  std::uint64_t final_merge = 0;
  std::uint64_t records_shuffled = 0;
  std::uint64_t result_records = 0;

  void total();
  std::string to_text() const;
  friend bool operator==(const TransferReport&, const TransferReport&) = default;
};

struct PlanResult {
  Bag result;
  TransferReport report;
};

struct PlanOptions {
  EvalLimits limits = EvalLimits::from_environment();
  Schedule schedule = Schedule::Serial;
};

// Records in the bags a fixpoint body reads besides its argument, i.e. what
// every partition must hold locally to run the body on its own.
std::uint64_t referenced_bag_records(const Value& phi);

// One global loop; each round applies φ partition-wise and merges with δ across the cluster.
PlanResult run_plan_p1(const PartitionedBag& r, const Value& phi, const Aggregator& delta,
                       const PlanOptions& opts = {});
// One semi-naive loop per partition, then a single δ merge of the partition results.
PlanResult run_plan_p2(const PartitionedBag& r, const Value& phi, const Aggregator& delta,
                       const PlanOptions& opts = {});
// P2 over data hash-partitioned on a component φ never changes, so the
// partition results are disjoint and a plain union replaces the final merge.
// δ must not merge elements that differ in that component.
PlanResult run_plan_p2_repartitioned(const PartitionedBag& r, const Value& phi, const Aggregator& delta,
                                     const TypePath& key_path, const PlanOptions& opts = {});

// First element-type node, root first, at which φ typechecks with that node
// made opaque. φ then carries the component at that node through unchanged.
std::optional<TypePath> find_repartition_key(const TypeEnv& env, const ExprPtr& phi, const TypeExpr& elem,
                                             BagKind kind = BagKind::Distributed);

// A term shape annotated with result sizes, for the analytic transfer model.
struct ShapeNode {
  enum class Kind { Input, Join, Cogroup, GroupBy, Distinct, Fixpoint, Local };
  Kind kind = Kind::Input;
  std::string name;
  std::uint64_t size = 0;  // records in this node's result
  std::vector<ShapeNode> children;

  static ShapeNode input(std::string name, std::uint64_t size) { return {Kind::Input, std::move(name), size, {}}; }
  static ShapeNode node(Kind kind, std::uint64_t size, std::vector<ShapeNode> children) {
    return {kind, {}, size, std::move(children)};
  }
};

struct ShapeCharge {
  std::string what;
  std::uint64_t records = 0;
};

struct ShapeCost {
  std::uint64_t total = 0;
  std::vector<ShapeCharge> charges;  // post-order
};

// join and cogroup move both inputs, groupBy moves its input, and distinct and
// P1 fixpoints move N copies of their result.
ShapeCost account_join_shapes(const ShapeNode& root, std::size_t n_partitions);

// The shape of a data expression, with sizes taken from evaluating each
// operator node. Function bodies are not entered.
ShapeNode shape_of(const ExprPtr& e, const EnvPtr& env, const EvalLimits& limits = EvalLimits::from_environment());

struct ClusterConfig {
  std::size_t cores = 1;
  std::size_t partitions = 0;  // 0: four per core
  std::uint64_t seed = 0;
  Schedule schedule = Schedule::Serial;
  std::size_t effective_partitions() const { return partitions ? partitions : 4 * cores; }
};

// How to execute one fixpoint node.
struct PlanDirective {
  Plan plan = Plan::P1;
  std::optional<TypePath> key;  // P2Repartitioned
  std::string reason;
};
using Directives = std::map<const Expr*, PlanDirective>;

struct DistributedRun {
  Value result;
  std::vector<TransferReport> reports;  // one per executed fixpoint, in execution order
  std::uint64_t records_shuffled() const;
};

// Evaluates e with every fixpoint executed under its directive. Fixpoints
// without one use `fallback`; P2Repartitioned without a key degrades to P2.
DistributedRun run_distributed(const ExprPtr& e, const EnvPtr& env, const Directives& directives,
                               const ClusterConfig& cluster, Plan fallback = Plan::P1,
                               const EvalLimits& limits = EvalLimits::from_environment());

}  // namespace mumonoids
