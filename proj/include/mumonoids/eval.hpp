#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mumonoids/expr.hpp"
#include "mumonoids/value.hpp"

namespace mumonoids {

class Aggregator;

// Persistent environment: each frame points at its parent and is never mutated.
class Env {
 public:
  Env(std::vector<Binding> frame, std::shared_ptr<const Env> parent)
      : frame_(std::move(frame)), parent_(std::move(parent)) {}
  const Value* lookup(std::string_view name) const;
  // Names visible from this frame, innermost binding first, without shadowed duplicates.
  std::vector<Binding> visible() const;

 private:
  std::vector<Binding> frame_;
  std::shared_ptr<const Env> parent_;
};
using EnvPtr = std::shared_ptr<const Env>;

EnvPtr empty_env();
EnvPtr extend(const EnvPtr& parent, std::vector<Binding> frame);
EnvPtr bind_value(const EnvPtr& parent, std::string name, Value v);

struct EvalLimits {
  std::size_t max_fixpoint_iterations = 1000;
  std::uint64_t max_bag_cardinality = 10'000'000;

  // Defaults, with MUMONOIDS_MAX_ITER overriding the iteration cap.
  static EvalLimits from_environment();
  void validate() const;
};

struct FixpointResult {
  Bag result;
  std::size_t iterations = 0;
};

// Everything a plan needs to execute one fixpoint node.
struct FixpointCall {
  const Expr& expr;
  const Aggregator& delta;
  const Bag& seed;
  const Value& phi;
};
using FixpointHandler = std::function<Bag(const FixpointCall&)>;

class Evaluator {
 public:
  explicit Evaluator(EvalLimits limits = EvalLimits::from_environment());

  const EvalLimits& limits() const { return limits_; }
  // Routes fixpoint nodes to an external executor instead of the reference loop.
  void set_fixpoint_handler(FixpointHandler h) { handler_ = std::move(h); }

  Value eval(const ExprPtr& e, const EnvPtr& env);
  Value apply(const Value& fn, const Value& arg);
  Bag apply_to_bag(const Value& fn, const Value& arg);

  Bag flatmap(const Value& f, const Bag& a);
  Value reduce(const Value& op, const Value& zero, const Bag& a);
  Bag reduce_by_key(const Value& op, const Bag& a);
  FixpointResult fixpoint(const Aggregator& delta, const Bag& seed, const Value& phi);

  // Iteration counts of the reference fixpoints run so far, in evaluation order.
  const std::vector<std::size_t>& fixpoint_log() const { return log_; }

  void check_cardinality(std::uint64_t n, std::string_view where) const;

 private:
  EvalLimits limits_;
  FixpointHandler handler_;
  std::vector<std::size_t> log_;
};

Value eval(const EnvPtr& env, const ExprPtr& e, const EvalLimits& limits = EvalLimits::from_environment());
Value apply_lambda(const Value& f, const Value& v);
Bag eval_flatmap(const Value& f, const Bag& a);
Value eval_reduce(const Value& op, const Value& zero, const Bag& a);
Bag eval_reduce_by_key(const Value& op, const Bag& a);
Bag eval_join(const Bag& a, const Bag& b);
Bag eval_cogroup(const Bag& a, const Bag& b);
FixpointResult eval_fixpoint(const Aggregator& delta, const Bag& r, const Value& phi,
                             const EvalLimits& limits = EvalLimits::from_environment());

}  // namespace mumonoids
