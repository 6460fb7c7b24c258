#include "mumonoids/aggregation.hpp"

#include "mumonoids/builtins.hpp"
#include "mumonoids/error.hpp"
#include "mumonoids/eval.hpp"

namespace mumonoids {

Aggregator Aggregator::identity() {
  Aggregator a;
  a.kind_ = AggregatorKind::Identity;
  return a;
}

Aggregator Aggregator::distinct() { return Aggregator{}; }

Aggregator Aggregator::by_key(const std::string& op) {
  if (op != "min" && op != "max") {
    throw Error(ErrorKind::InvalidArgument, "aggregator", "by-key aggregation supports min and max, not '" + op + "'");
  }
  Aggregator a;
  a.kind_ = AggregatorKind::ReduceByKey;
  a.op_ = op;
  return a;
}

Aggregator Aggregator::filter(Pattern pattern, std::string var, Value predicate) {
  if (!pattern.binds(var)) {
    throw Error(ErrorKind::InvalidArgument, "aggregator", "filter variable " + var + " does not occur in its pattern");
  }
  Aggregator a;
  a.kind_ = AggregatorKind::Filter;
  a.pattern_ = std::move(pattern);
  a.var_ = std::move(var);
  a.predicate_ = std::move(predicate);
  return a;
}

Aggregator Aggregator::from_spec(const AggregatorSpec& spec, const std::shared_ptr<const Env>& env) {
  switch (spec.kind) {
    case AggregatorKind::Identity: return identity();
    case AggregatorKind::Distinct: return distinct();
    case AggregatorKind::ReduceByKey: return by_key(spec.op);
    case AggregatorKind::Filter: {
      auto fn = ex::lambda(Pattern::var(spec.var), spec.predicate);
      return filter(*spec.pattern, spec.var, Value::closure(fn, env ? env : empty_env()));
    }
  }
  throw Error(ErrorKind::Internal, "aggregator", "unknown aggregator kind");
}

std::string Aggregator::name() const {
  switch (kind_) {
    case AggregatorKind::Identity: return "identity";
    case AggregatorKind::Distinct: return "distinct";
    case AggregatorKind::ReduceByKey: return op_ + "ByKey";
    case AggregatorKind::Filter: return "filter";
  }
  return "?";
}

bool Aggregator::key_local(const TypePath& path) const {
  if (kind_ != AggregatorKind::ReduceByKey) return true;
  return !path.empty() && path.front().ctor == kTupleCtor && path.front().index == 0;
}

Bag Aggregator::apply(const Bag& a) const {
  switch (kind_) {
    case AggregatorKind::Identity: return a;
    case AggregatorKind::Distinct: return mumonoids::distinct(a);
    case AggregatorKind::ReduceByKey: {
      const Builtin& fold = builtin(op_);
      BagBuilder out;
      const auto entries = a.entries();
      std::size_t i = 0;
      while (i < entries.size()) {
        const Value& first = entries[i].first;
        if (!first.is_pair()) throw_malformed("aggregator", name() + " expects (key, value) pairs, found " + to_string(first));
        const Value key = first.args()[0];
        Value acc = first.args()[1];
        std::size_t j = i + 1;
        for (; j < entries.size() && entries[j].first.is_pair() && entries[j].first.args()[0] == key; ++j) {
          const Value args[] = {acc, entries[j].first.args()[1]};
          acc = fold.eval(std::span<const Value>(args));
        }
        out.add(Value::pair(key, acc));
        i = j;
      }
      return out.build();
    }
    case AggregatorKind::Filter: {
      Evaluator ev;
      BagBuilder out;
      for (const auto& [v, c] : a.entries()) {
        auto b = pattern_match(v, *pattern_);
        if (!b) continue;
        for (const auto& [name, bound] : *b) {
          if (name != var_) continue;
          const auto keep = ev.apply(predicate_, bound).as_bool();
          if (!keep) throw Error(ErrorKind::BuiltinType, "aggregator", "filter predicate did not return a Bool");
          if (*keep) out.add(v, c);
        }
      }
      return out.build();
    }
  }
  return a;
}

bool Annotations::asserts(const std::string& aggregator, const std::string& label) const {
  return compatible.count({aggregator, label}) > 0 || compatible.count({aggregator, "*"}) > 0;
}

ProbeResult probe_compatibility(const Aggregator& delta, const Value& phi, const SampleGen& sample_gen,
                                std::size_t n_samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Evaluator ev;
  ProbeResult res;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Bag a = sample_gen(rng);
    ++res.samples;
    const Bag lhs = delta.apply(ev.apply_to_bag(phi, Value::bag(delta.apply(a))));
    const Bag rhs = delta.apply(ev.apply_to_bag(phi, Value::bag(a)));
    if (lhs != rhs) {
      res.verdict = Verdict::Refuted;
      res.counterexample = a;
      return res;
    }
  }
  return res;
}

}  // namespace mumonoids
