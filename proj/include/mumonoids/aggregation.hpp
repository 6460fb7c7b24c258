#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>

#include "mumonoids/expr.hpp"
#include "mumonoids/types.hpp"
#include "mumonoids/value.hpp"

namespace mumonoids {

class Env;

// An aggregation function δ: δ({}) = {} and δ(a ⊎ b) = δ(δ(a) ⊎ δ(b)).
class Aggregator {
 public:
  static Aggregator identity();
  static Aggregator distinct();
  // Keeps one (k, v) pair per key, folding values with a builtin (min or max).
  static Aggregator by_key(const std::string& op);
  static Aggregator min_by_key() { return by_key("min"); }
  static Aggregator max_by_key() { return by_key("max"); }
  // Keeps elements matching `pattern` whose `var` satisfies `predicate`,
  // a function value from the variable's value to Bool.
  static Aggregator filter(Pattern pattern, std::string var, Value predicate);
  static Aggregator from_spec(const AggregatorSpec& spec, const std::shared_ptr<const Env>& env);

  AggregatorKind kind() const { return kind_; }
  std::string name() const;
  const std::string& op() const { return op_; }

  // Whether merging partition results needs global coordination
  // (distinct and by-key do, identity and filters work element-wise).
  bool is_global() const { return kind_ == AggregatorKind::Distinct || kind_ == AggregatorKind::ReduceByKey; }
  // δ ∘ distinct = δ.
  bool ignores_multiplicity() const { return is_global(); }
  // Whether elements that differ at `path` never interact under δ, so
  // partitions that disagree on `path` can be merged with a plain union.
  bool key_local(const TypePath& path) const;

  Bag apply(const Bag& a) const;
  Bag combine(const Bag& a, const Bag& b) const { return apply(bag_union(a, b)); }

  std::set<std::string> compatible_with;

 private:
  AggregatorKind kind_ = AggregatorKind::Distinct;
  std::string op_;
  std::optional<Pattern> pattern_;
  std::string var_;
  Value predicate_;
};

inline Bag apply(const Aggregator& d, const Bag& a) { return d.apply(a); }
inline Bag combine(const Aggregator& d, const Bag& a, const Bag& b) { return d.combine(a, b); }

// Programmer assertions that an aggregator is compatible with a fixpoint body,
// keyed by aggregator name and fixpoint label ("*" matches every label).
struct Annotations {
  std::set<std::pair<std::string, std::string>> compatible;
  void add(std::string aggregator, std::string label) { compatible.emplace(std::move(aggregator), std::move(label)); }
  bool asserts(const std::string& aggregator, const std::string& label) const;
};

enum class Verdict { Refuted, NotRefuted };

struct ProbeResult {
  Verdict verdict = Verdict::NotRefuted;
  std::optional<Bag> counterexample;
  std::size_t samples = 0;
};

using SampleGen = std::function<Bag(std::mt19937_64&)>;

// Looks for a bag a with δ(φ(δ(a))) ≠ δ(φ(a)). Finding none proves nothing.
ProbeResult probe_compatibility(const Aggregator& delta, const Value& phi, const SampleGen& sample_gen,
                                std::size_t n_samples, std::uint64_t seed = 1);

}  // namespace mumonoids
