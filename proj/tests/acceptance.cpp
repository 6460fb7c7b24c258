// Acceptance checks: one PASS/FAIL line per criterion, exit status 0 only
// when every criterion passes.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "mumonoids/dist.hpp"
#include "mumonoids/error.hpp"
#include "mumonoids/eval.hpp"
#include "mumonoids/gen.hpp"
#include "mumonoids/optimizer.hpp"
#include "mumonoids/parser.hpp"
#include "mumonoids/programs.hpp"
#include "mumonoids/typecheck.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

namespace mm = mumonoids;
namespace mt = mumonoids::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string details;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      details += (details.empty() ? "" : "; ") + what;
    }
  }
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

mm::Value eval_text(const std::string& program, const std::map<std::string, mm::Value>& inputs = {}) {
  const mm::Program p = mm::parse_program(program);
  return mm::eval(mt::env_of(inputs), p.body);
}

mm::Bag bag_of(const char* text) { return mm::parse_value(text).as_bag(); }

// Splits b into 2..4 random non-empty-or-empty parts.
std::vector<mm::Bag> random_split(const mm::Bag& b, std::mt19937_64& rng) {
  const std::size_t parts = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
  std::vector<mm::BagBuilder> builders(parts);
  std::uniform_int_distribution<std::size_t> pick(0, parts - 1);
  for (const auto& [v, n] : b.entries())
    for (std::uint64_t i = 0; i < n; ++i) builders[pick(rng)].add(v);
  std::vector<mm::Bag> out;
  for (auto& bb : builders) out.push_back(bb.build());
  return out;
}

Outcome local_semantics() {
  Outcome o;
  o.require(eval_text("reduce((+), 0, {1, 4, 6})") == mm::Value::integer(11), "reduce((+), 0, {1,4,6}) != 11");
  const mm::Value by_key = eval_text("reduceByKey((+), {(1, 2), (1, 4), (2, 2), (2, 1), (1, 3)})");
  o.require(by_key.as_bag() == bag_of("{Tuple(1,9), Tuple(2,3)}"),
            "reduceByKey golden mismatch: " + mm::to_string(by_key));

  const mm::Program words = mm::parse_program(mm::kWordsSource);
  const std::map<std::string, mm::Value> in{{"C", mm::parse_value(R"({"a", "b", "c"})")}};
  mm::Evaluator ev;
  const mm::Value result = ev.eval(words.body, mt::env_of(in));
  o.require(ev.fixpoint_log() == std::vector<std::size_t>{3},
            fmt::format("words fixpoint iterations {}", fmt::join(ev.fixpoint_log(), ",")));

  const mm::Value append = mm::eval(mt::env_of(in), mm::parse_expr(
      R"(\X -> flatmap(\x -> flatmap(\c -> if contains x c then {} else {x + c}, C), X))"));
  const mm::Bag r1 = mm::apply_lambda(append, in.at("C")).as_bag();
  o.require(r1 == bag_of(R"({"ab", "ac", "ba", "bc", "ca", "cb"})"), "first step " + mm::to_string(r1));

  std::vector<mm::Value> expected;
  for (const auto& w : mt::words_without_repeats({"a", "b", "c"})) expected.push_back(mm::Value::string(w));
  o.require(expected.size() == 15 && result.as_bag() == mm::Bag::from_values(expected),
            "words result " + mm::to_string(result));
  if (o.pass) o.details = "reduce=11, reduceByKey golden, words: 3 iterations, 15 words";
  return o;
}

Outcome graph_oracles() {
  Outcome o;
  const mm::Program tc = mm::load_benchmark("TC");
  const mm::Program sp = mm::load_benchmark("SP");
  const mm::ExprPtr tc_body = mm::inline_lets(tc.body);
  const mm::Optimized sp_opt = mm::optimize(sp.body, {sp.type_env(), sp.annotations, 50, 1});
  o.require(sp_opt.trace.applied("PA"), "PA did not fire on SP");
  std::size_t tc_ok = 0, sp_ok = 0;
  for (std::uint64_t s = 1; s <= 100; ++s) {
    const std::int64_t n = 3 + static_cast<std::int64_t>(s % 10);
    const double p = 0.1 + 0.05 * static_cast<double>(s % 6);
    const mm::Bag g = mm::gen_erdos_renyi(n, p, s);
    tc_ok += mm::eval(mt::env_of({{"R", mm::Value::bag(g)}}), tc_body).as_bag() == mt::warshall(g);
    const mm::Bag w = mm::gen_erdos_renyi(n, p, 1000 + s, true);
    sp_ok += mm::eval(mt::env_of({{"R", mm::Value::bag(w)}}), sp_opt.expr).as_bag() == mt::floyd_warshall(w);
  }
  o.require(tc_ok == 100, fmt::format("TC agreed with Warshall on {}/100", tc_ok));
  o.require(sp_ok == 100, fmt::format("SP agreed with Floyd-Warshall on {}/100", sp_ok));
  if (o.pass) o.details = "TC 100/100 vs Warshall, optimized SP 100/100 vs Floyd-Warshall, n<=12";
  return o;
}

Outcome compatibility_splits() {
  Outcome o;
  struct Combo {
    const char* name;
    mm::Aggregator delta;
    const char* phi;
    std::function<mm::Bag(std::uint64_t)> data;
  };
  const std::vector<Combo> combos = {
      {"TC x distinct", mm::Aggregator::distinct(), mt::kTcPhi,
       [](std::uint64_t s) { return mm::gen_erdos_renyi(8, 0.25, s); }},
      {"SP x minByKey", mm::Aggregator::min_by_key(), mt::kSpPhi,
       [](std::uint64_t s) { return mm::gen_erdos_renyi(8, 0.25, s, true); }},
      {"SP x distinct", mm::Aggregator::distinct(), mt::kSpPhi,
       [](std::uint64_t s) { return mm::gen_dag(8, 0.3, s, true); }},
  };
  std::vector<std::string> summary;
  for (const auto& c : combos) {
    std::size_t ok = 0;
    std::mt19937_64 rng(17);
    for (std::uint64_t s = 1; s <= 100; ++s) {
      const mm::Bag r = c.data(s);
      const mm::Value phi = mt::close_phi(c.phi, {{"R", mm::Value::bag(r)}});
      const mm::Bag whole = mm::eval_fixpoint(c.delta, r, phi).result;
      mm::Bag merged;
      for (const mm::Bag& part : random_split(r, rng))
        merged = mm::bag_union(merged, mm::eval_fixpoint(c.delta, part, phi).result);
      ok += c.delta.apply(merged) == whole;
    }
    o.require(ok == 100, fmt::format("{}: {}/100 splits agree", c.name, ok));
    summary.push_back(fmt::format("{} 100/100", c.name));
  }

  // minByKey is not compatible with the TC body; the probe must say so.
  const mm::Bag g = mm::gen_erdos_renyi(8, 0.3, 5);
  const mm::Value tc_phi = mt::close_phi(mt::kTcPhi, {{"R", mm::Value::bag(g)}});
  const mm::ProbeResult probe = mm::probe_compatibility(
      mm::Aggregator::min_by_key(), tc_phi,
      [&](std::mt19937_64& rng) {
        std::vector<mm::Value> sub;
        for (const auto& [e, n] : g.entries())
          if (rng() % 2) sub.push_back(e);
        return mm::Bag::from_values(std::move(sub));
      },
      200, 3);
  o.require(probe.verdict == mm::Verdict::Refuted, "probe did not refute minByKey with the TC body");
  if (o.pass) o.details = fmt::format("{}; TC x minByKey refuted by probe", fmt::join(summary, ", "));
  return o;
}

Outcome rewrite_soundness() {
  Outcome o;
  struct Rule {
    const char* name;
    mt::RuleFn fn;
    mt::RuleInstance (*make)(std::uint64_t);
  };
  const std::vector<Rule> rules = {{"PF", mm::rewrite_pf, mt::filter_instance},
                                   {"PJ", mm::rewrite_pj, mt::join_instance},
                                   {"PA", mm::rewrite_pa, mt::aggregate_instance}};
  std::vector<std::string> summary;
  for (const auto& r : rules) {
    const mt::SoundnessTally t = mt::check_rule_soundness(r.name, r.fn, r.make, 200);
    o.require(t.fired == 200, fmt::format("{} fired on {} of {} instances", r.name, t.fired, t.attempts));
    o.require(t.mismatches.empty(),
              fmt::format("{} changed {} results, first {}", r.name, t.mismatches.size(),
                          t.mismatches.empty() ? "" : t.mismatches.front()));
    summary.push_back(fmt::format("{} {}/{} sound", r.name, t.fired - t.mismatches.size(), t.fired));
  }
  const mt::ConditionTally c = mt::check_condition_c_oracle(40);
  o.require(c.contradictions.empty(), fmt::format("{} preservation claims refuted, first {}", c.contradictions.size(),
                                                  c.contradictions.empty() ? "" : c.contradictions.front()));
  if (o.pass) {
    o.details = fmt::format("{}; preservation check {} pairs, {} accepted by types, {} refuted by sampling, 0 both",
                            fmt::join(summary, ", "), c.checks, c.type_accepted, c.semantic_refuted);
  }
  return o;
}

Outcome plan_equivalence() {
  Outcome o;
  std::size_t runs = 0;
  for (const auto& bp : mm::benchmark_programs()) {
    const mm::Program prog = mm::parse_program(bp.source);
    const mm::Optimized opt = mm::optimize(prog.body, {prog.type_env(), prog.annotations, 50, 1});
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      mm::DatasetConfig cfg;
      cfg.n = bp.id == "PathPlanning" ? 6 : 8;
      cfg.seed = seed;
      cfg.acyclic = bp.id == "PathPlanning";
      const auto inputs = mm::make_inputs(bp.id, cfg);
      const mm::EnvPtr env = mt::env_of(inputs);
      const mm::Value local = mm::eval(env, opt.expr);
      for (std::size_t p : {1, 2, 4, 8}) {
        for (mm::Plan plan : {mm::Plan::P1, mm::Plan::P2, mm::Plan::P2Repartitioned}) {
          mm::ClusterConfig cluster;
          cluster.partitions = p;
          cluster.seed = seed;
          const mm::DistributedRun run = mm::run_distributed(opt.expr, env, {}, cluster, plan);
          ++runs;
          o.require(run.result == local,
                    fmt::format("{} {} p={} seed={} differs from local evaluation", bp.id, mm::to_string(plan), p, seed));
        }
        mm::ClusterConfig cluster;
        cluster.partitions = p;
        cluster.seed = seed;
        ++runs;
        o.require(mm::run_distributed(opt.expr, env, opt.directives, cluster).result == local,
                  fmt::format("{} optimizer plan p={} seed={} differs", bp.id, p, seed));
      }
    }
  }
  if (o.pass) o.details = fmt::format("7 programs x p in {{1,2,4,8}} x 3 seeds, {} distributed runs equal local", runs);
  return o;
}

Outcome transfer_model() {
  Outcome o;
  const mm::Bag g = mm::gen_erdos_renyi(100, 0.02, 42);
  const mm::Value phi = mt::close_phi(mt::kTcPhi, {{"R", mm::Value::bag(g)}});
  const mm::PartitionedBag parts = mm::partition(g, 4, mm::Partitioner::round_robin(42));
  const mm::Aggregator d = mm::Aggregator::distinct();
  const auto p1 = mm::run_plan_p1(parts, phi, d);
  const auto p2 = mm::run_plan_p2(parts, phi, d);
  const mm::TypeExpr elem = mm::TypeExpr::pair(mm::TypeExpr::int_type(), mm::TypeExpr::int_type());
  const auto key = mm::find_repartition_key({{"R", mm::TypeExpr::dist_bag(elem)}}, mm::parse_expr(mt::kTcPhi), elem);
  o.require(key.has_value(), "no repartition key found for TC");
  if (key) {
    const auto p2r = mm::run_plan_p2_repartitioned(parts, phi, d, *key);
    o.require(p2r.report.final_merge == 0, fmt::format("P2r final merge {}", p2r.report.final_merge));
    o.require(p2r.result == p1.result, "P2r result differs from P1");
  }
  o.require(p2.report.records_shuffled < p1.report.records_shuffled,
            fmt::format("P2 shuffled {} >= P1 {}", p2.report.records_shuffled, p1.report.records_shuffled));
  o.require(p2.result == p1.result, "P2 result differs from P1");

  using K = mm::ShapeNode::Kind;
  const mm::ShapeNode s1 = mm::ShapeNode::node(
      K::Join, 0, {mm::ShapeNode::input("A", 10), mm::ShapeNode::node(K::Fixpoint, 100, {mm::ShapeNode::input("R", 20)})});
  const mm::ShapeNode s2 = mm::ShapeNode::node(
      K::Join, 0,
      {mm::ShapeNode::input("A", 10),
       mm::ShapeNode::node(K::Fixpoint, 40,
                           {mm::ShapeNode::node(K::Local, 0,
                                                {mm::ShapeNode::node(K::Cogroup, 0,
                                                                     {mm::ShapeNode::input("R", 20),
                                                                      mm::ShapeNode::input("A", 10)})})})});
  const auto c1 = mm::account_join_shapes(s1, 5).total;
  const auto c2 = mm::account_join_shapes(s2, 5).total;
  o.require(c1 == 610, fmt::format("S1 = {}", c1));
  o.require(c2 == 280, fmt::format("S2 = {}", c2));
  if (o.pass) {
    o.details = fmt::format("TC on ER(100,0.02), N=4: P1 {} > P2 {}, P2r final merge 0; S1=610, S2=280",
                            p1.report.records_shuffled, p2.report.records_shuffled);
  }
  return o;
}

Outcome iteration_limit() {
  Outcome o;
  ::setenv("MUMONOIDS_MAX_ITER", "7", 1);
  const mm::EvalLimits limits = mm::EvalLimits::from_environment();
  ::unsetenv("MUMONOIDS_MAX_ITER");
  o.require(limits.max_fixpoint_iterations == 7, "MUMONOIDS_MAX_ITER ignored");
  const mm::Bag cycle = bag_of("{Tuple(0,1), Tuple(1,2), Tuple(2,0)}");
  const mm::Value phi = mt::close_phi(mt::kTcPhi, {{"R", mm::Value::bag(cycle)}});
  try {
    mm::eval_fixpoint(mm::Aggregator::identity(), cycle, phi, limits);
    o.require(false, "identity fixpoint over a cycle terminated");
  } catch (const mm::IterationLimitError& e) {
    o.require(e.iterations() == 7, fmt::format("stopped after {} iterations", e.iterations()));
    o.require(mm::exit_code(e.kind()) != 0, "iteration limit maps to exit status 0");
  }
  const auto closed = mm::eval_fixpoint(mm::Aggregator::distinct(), cycle, phi, limits);
  o.require(closed.result.size() == 9, fmt::format("distinct closure has {} pairs", closed.result.size()));
  if (o.pass) o.details = "identity diverges and stops at exactly 7 iterations; distinct gives 9 pairs";
  return o;
}

std::string rejection_rule(const std::string& program) {
  try {
    const mm::Program p = mm::parse_program(program);
    mm::infer(p.type_env(), p.body);
  } catch (const mm::Error& e) {
    return e.rule();
  }
  return "accepted";
}

Outcome type_discipline() {
  Outcome o;
  std::size_t typed = 0;
  for (const auto& bp : mm::benchmark_programs()) {
    const std::string rule = rejection_rule(bp.source);
    o.require(rule == "accepted", bp.id + " rejected by rule " + rule);
    typed += rule == "accepted";
  }
  o.require(rejection_rule("input R : Bag_d<Int>;\nflatmap(\\x -> R, R)") == "flatmap",
            "nested distributed bag not rejected by the flatmap rule");
  o.require(rejection_rule("input R : Bag_d<(Int,Int)>;\nflatmap(\\(x, x) -> {x}, R)") == "pattern",
            "repeated pattern variable not rejected by the pattern rule");
  for (const char* phi : {mt::kTcPhi, mt::kSpPhi, mt::kFlightsPhi}) {
    o.require(mm::is_syntactic_homomorphism(*mm::parse_expr(phi)), std::string("not a homomorphism: ") + phi);
  }
  o.require(!mm::is_syntactic_homomorphism(*mm::parse_expr("\\X -> join(X, X)")), "join(X, X) accepted");
  if (o.pass) {
    o.details = fmt::format("{} programs typecheck; flatmap and pattern rejections; homomorphism 3 accepted, 1 rejected",
                            typed);
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "local semantics", 1, local_semantics},
      {2, "fixpoints against graph oracles", 30, graph_oracles},
      {3, "compatibility over random splits", 120, compatibility_splits},
      {4, "rewrite soundness", 300, rewrite_soundness},
      {5, "distributed plans equal local evaluation", 300, plan_equivalence},
      {6, "transfer model", 60, transfer_model},
      {7, "iteration limit", 10, iteration_limit},
      {8, "type discipline", 10, type_discipline},
  };
  bool all = true;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.details = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_seconds) {
      o.pass = false;
      o.details += fmt::format(" (over the {}s budget)", c.budget_seconds);
    }
    all = all && o.pass;
    fmt::print("{} {} {} ({:.2f}s): {}\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.details);
  }
  return all ? 0 : 1;
}
