#include "instances.hpp"

#include <random>

#include <fmt/format.h>

#include "mumonoids/error.hpp"
#include "mumonoids/gen.hpp"
#include "mumonoids/parser.hpp"
#include "mumonoids/typecheck.hpp"
#include "oracles.hpp"

namespace mumonoids::testing {

namespace {

Bag random_nodes(std::mt19937_64& rng, std::int64_t n, std::size_t max_count) {
  std::uniform_int_distribution<std::int64_t> node(0, n - 1);
  std::uniform_int_distribution<std::size_t> count(0, max_count);
  std::vector<Value> v;
  for (std::size_t i = count(rng); i > 0; --i) v.push_back(Value::integer(node(rng)));
  return distinct(Bag::from_values(std::move(v)));
}

template <class T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& options) {
  return options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
}

std::string fill(std::string text, std::mt19937_64& rng, std::int64_t range) {
  std::uniform_int_distribution<std::int64_t> num(0, range - 1);
  for (const char* hole : {"K", "J"}) {
    for (std::size_t at = text.find(std::string("$") + hole); at != std::string::npos;
         at = text.find(std::string("$") + hole)) {
      text.replace(at, 2, std::to_string(num(rng)));
    }
  }
  return text;
}

}  // namespace

RuleInstance filter_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::int64_t n = 5 + static_cast<std::int64_t>(seed % 6);
  RuleInstance inst;
  inst.inputs["S"] = Value::bag(random_nodes(rng, n, 3));
  switch (seed % 3) {
    case 0: {
      static const std::vector<std::string> conds = {
          "member src S", "src < $K", "src == $K", "member src S and dst < $K", "dst == $K",
          "src != $K and dst != $J", "src < $K and member src S", "dst < $K and src < $J"};
      inst.inputs["R"] = Value::bag(gen_erdos_renyi(n, 0.3, seed));
      inst.source = "input R : Bag_d<(Int,Int)>;\ninput S : Bag_l<Int>;\nflatmap(\\(src, dst) -> if " +
                    fill(pick(rng, conds), rng, n) + " then {(src, dst)} else {}, fix(R, " + kTcPhi + "))";
      break;
    }
    case 1: {
      static const std::vector<std::string> conds = {"member src S", "src < $K and w < $J", "src == $K",
                                                     "w < $K", "member src S and dst != $K"};
      inst.inputs["R"] = Value::bag(gen_dag(n, 0.35, seed, true));
      inst.source = "input R : Bag_d<((Int,Int),Int)>;\ninput S : Bag_l<Int>;\nflatmap(\\((src, dst), w) -> if " +
                    fill(pick(rng, conds), rng, n) + " then {((src, dst), w)} else {}, fix(R, " + kSpPhi + "))";
      break;
    }
    default: {
      static const std::vector<std::string> conds = {"dep == \"A1\"", "dt < $K", "dep == \"A0\" and dur < 3",
                                                     "dest == \"A2\"", "dt < $K and at < $J"};
      inst.inputs["R"] = Value::bag(gen_flights(4, 12, seed));
      inst.source =
          "input R : Bag_d<Flight(Int,Int,String,String,Int)>;\ninput S : Bag_l<Int>;\n"
          "flatmap(\\Flight(dt, at, dep, dest, dur) -> if " +
          fill(pick(rng, conds), rng, 20) + " then {Flight(dt, at, dep, dest, dur)} else {}, fix(R, " + kFlightsPhi +
          "))";
      break;
    }
  }
  return inst;
}

RuleInstance join_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::int64_t n = 5 + static_cast<std::int64_t>(seed % 7);
  RuleInstance inst;
  inst.inputs["R"] = Value::bag(gen_erdos_renyi(n, 0.3, seed));
  std::vector<Value> a;
  std::uniform_int_distribution<std::int64_t> node(0, n - 1);
  for (int i = std::uniform_int_distribution<int>(0, 3)(rng); i > 0; --i) {
    a.push_back(Value::pair(Value::integer(node(rng)), Value::string(fmt::format("tag{}", i))));
  }
  inst.inputs["A"] = Value::bag(Bag::from_values(std::move(a)));
  const std::string fix = std::string("fix(R, ") + kTcPhi + ")";
  inst.source = "input R : Bag_d<(Int,Int)>;\ninput A : Bag_d<(Int,String)>;\n" +
                (seed % 2 ? "join(A, " + fix + ")" : "join(" + fix + ", A)");
  return inst;
}

RuleInstance aggregate_instance(std::uint64_t seed) {
  const std::int64_t n = 4 + static_cast<std::int64_t>(seed % 7);
  RuleInstance inst;
  if (seed % 2) {
    inst.inputs["R"] = Value::bag(gen_dag(n, 0.4, seed, true));
    inst.source = std::string("input R : Bag_d<((Int,Int),Int)>;\nassume compatible(minByKey, paths);\n") +
                  "reduceByKey(min, fix[distinct; paths](R, " + kSpPhi + "))";
  } else {
    inst.inputs["R"] = Value::bag(gen_dag(n, 0.4, seed));
    inst.source = std::string("input R : Bag_d<(Int,Int)>;\ndistinct(fix[identity](R, ") + kTcPhi + "))";
  }
  return inst;
}

SoundnessTally check_rule_soundness(const std::string& rule_name, const RuleFn& rule,
                                    RuleInstance (*make)(std::uint64_t), std::size_t wanted,
                                    std::uint64_t first_seed) {
  SoundnessTally t;
  for (std::uint64_t seed = first_seed; t.fired < wanted && t.attempts < 20 * wanted; ++seed) {
    ++t.attempts;
    const RuleInstance inst = make(seed);
    const Program p = parse_program(inst.source);
    const ExprPtr before = inline_lets(p.body);
    const RewriteResult r = rule(before, {p.type_env(), p.annotations, 50, seed});
    if (!r.trace.applied(rule_name)) continue;
    ++t.fired;
    const EnvPtr env = env_of(inst.inputs);
    const Value a = normalized(eval(env, before));
    const Value b = normalized(eval(env, r.expr));
    if (a != b) t.mismatches.push_back(fmt::format("seed {}: {}", seed, print_expr(before)));
  }
  return t;
}

ConditionTally check_condition_c_oracle(std::size_t samples, std::uint64_t seed) {
  struct Case {
    const char* phi;
    const char* elem;
    const char* pattern;
    std::vector<const char*> vars;
    std::function<Bag(std::uint64_t)> data;
  };
  const std::vector<Case> cases = {
      {kTcPhi, "(Int,Int)", "(src, dst)", {"src", "dst"}, [](std::uint64_t s) { return gen_erdos_renyi(6, 0.35, s); }},
      {kSpPhi, "((Int,Int),Int)", "((src, dst), w)", {"src", "dst", "w"},
       [](std::uint64_t s) { return gen_erdos_renyi(6, 0.35, s, true); }},
      {kFlightsPhi, "Flight(Int,Int,String,String,Int)", "Flight(dt, at, dep, dest, dur)",
       {"dt", "at", "dep", "dest", "dur"}, [](std::uint64_t s) { return gen_flights(3, 12, s); }},
      {R"(\X -> flatmap(\(a, b) -> {(b, a)}, X))", "(Int,Int)", "(src, dst)", {"src", "dst"},
       [](std::uint64_t s) { return gen_erdos_renyi(6, 0.35, s); }},
      {R"(\X -> flatmap(\(k, (v, w)) -> {(k, w)}, join(X, R)))", "(Int,Int)", "(src, dst)", {"src", "dst"},
       [](std::uint64_t s) { return gen_erdos_renyi(6, 0.35, s); }},
  };
  ConditionTally t;
  std::mt19937_64 rng(seed);
  for (const auto& c : cases) {
    const TypeExpr elem = parse_type(c.elem);
    const TypeEnv env{{"R", TypeExpr::dist_bag(elem)}};
    const ExprPtr phi = parse_expr(c.phi);
    const Pattern pattern = parse_pattern(c.pattern);
    for (const char* var : c.vars) {
      ++t.checks;
      const bool accepted = check_condition_c(env, phi, elem, BagKind::Distributed, pattern, var);
      const TypePath path = pattern_path(pattern, var);
      bool refuted = false;
      for (std::size_t i = 0; i < samples && !refuted; ++i) {
        const Value phi_v = close_phi(c.phi, {{"R", Value::bag(c.data(seed + i))}});
        // Elements drawn from the data itself make joins likely to produce output.
        const Bag data = c.data(seed + i);
        Value r = random_value(elem, rng, 6, 3);
        if (!data.empty() && i % 2 == 0) {
          r = data.entries()[std::uniform_int_distribution<std::size_t>(0, data.distinct_size() - 1)(rng)].first;
        }
        const Value out_v = apply_lambda(phi_v, Value::bag(Bag::singleton(r)));
        const Bag& out = out_v.as_bag();
        for (const auto& [s, n] : out.entries()) {
          if (value_at_path(s, path) != value_at_path(r, path)) refuted = true;
        }
      }
      t.type_accepted += accepted;
      t.semantic_refuted += refuted;
      if (accepted && refuted) t.contradictions.push_back(std::string(c.phi) + " / " + var);
    }
  }
  return t;
}

}  // namespace mumonoids::testing
