#include <doctest.h>

#include <random>
#include <set>

#include "mumonoids/dist.hpp"
#include "mumonoids/error.hpp"
#include "mumonoids/gen.hpp"
#include "mumonoids/optimizer.hpp"
#include "mumonoids/parser.hpp"
#include "mumonoids/programs.hpp"
#include "support/oracles.hpp"

using namespace mumonoids;

namespace {

const TypeExpr kEdge = TypeExpr::pair(TypeExpr::int_type(), TypeExpr::int_type());
const TypePath kSrc{{"Tuple", 0}};

Bag chain(std::int64_t n) {
  std::vector<Value> v;
  for (std::int64_t i = 0; i + 1 < n; ++i) v.push_back(Value::pair(Value::integer(i), Value::integer(i + 1)));
  return Bag::from_values(std::move(v));
}

Value tc_phi(const Bag& r) { return testing::close_phi(testing::kTcPhi, {{"R", Value::bag(r)}}); }

std::vector<Bag> random_parts(const Bag& b, std::size_t p, std::mt19937_64& rng) {
  std::vector<BagBuilder> builders(p);
  for (const auto& [v, n] : b.entries())
    for (std::uint64_t i = 0; i < n; ++i) builders[rng() % p].add(v);
  std::vector<Bag> out;
  for (auto& bb : builders) out.push_back(bb.build());
  return out;
}

}  // namespace

TEST_SUITE("dist-sim") {
  TEST_CASE("partitioning preserves the input") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
      const Bag b = gen_erdos_renyi(8, 0.3, static_cast<std::uint64_t>(i));
      const std::size_t p = 1 + rng() % 6;
      for (const Partitioner& how : {Partitioner::round_robin(rng()), Partitioner::by_key_hash(kSrc)}) {
        const PartitionedBag parts = partition(b, p, how);
        CHECK(parts.count() == p);
        CHECK(parts.merged() == b);
        CHECK(parts.records() == b.size());
      }
      const PartitionedBag rr = partition(b, p, Partitioner::round_robin(7));
      std::uint64_t lo = b.size(), hi = 0;
      for (const Bag& part : rr.partitions) {
        lo = std::min(lo, part.size());
        hi = std::max(hi, part.size());
      }
      CHECK(hi - lo <= 1);
    }
    const Bag one = gen_erdos_renyi(5, 0.5, 3);
    CHECK(partition(one, 1, Partitioner::round_robin(4)).partitions == std::vector<Bag>{one});
    CHECK_THROWS_AS(partition(one, 0, Partitioner::round_robin(4)), Error);
    CHECK_THROWS_AS(partition_explicit({}), Error);
  }

  TEST_CASE("hash partitioning keeps each key in one partition") {
    const Bag g = gen_erdos_renyi(12, 0.3, 5);
    const PartitionedBag parts = partition(g, 3, Partitioner::by_key_hash(kSrc));
    std::map<Value, std::size_t> home;
    for (std::size_t i = 0; i < parts.count(); ++i) {
      for (const auto& [e, n] : parts.partitions[i].entries()) {
        const auto [it, fresh] = home.emplace(e.args()[0], i);
        CHECK(it->second == i);
      }
    }
  }

  TEST_CASE("plans agree with the reference loop") {
    const Aggregator d = Aggregator::distinct();
    const Bag c = chain(7);
    const Bag expected = eval_fixpoint(d, c, tc_phi(c)).result;
    const auto p1 = run_plan_p1(partition(c, 2, Partitioner::round_robin(1)), tc_phi(c), d);
    CHECK(p1.result == expected);
    CHECK(p1.result.size() == 21);

    std::mt19937_64 rng(9);
    for (int i = 0; i < 60; ++i) {
      const Bag g = gen_erdos_renyi(8, 0.25, static_cast<std::uint64_t>(i));
      const Value phi = tc_phi(g);
      const Bag ref = eval_fixpoint(d, g, phi).result;
      const PartitionedBag parts = partition_explicit(random_parts(g, 1 + rng() % 5, rng));
      CHECK(run_plan_p1(parts, phi, d).result == ref);
      CHECK(run_plan_p2(parts, phi, d).result == ref);
      CHECK(run_plan_p2_repartitioned(parts, phi, d, kSrc).result == ref);
    }
  }

  TEST_CASE("shortest paths under every plan") {
    const Aggregator d = Aggregator::min_by_key();
    for (std::uint64_t s = 1; s <= 20; ++s) {
      const Bag w = gen_erdos_renyi(7, 0.3, s, true);
      const Value phi = testing::close_phi(testing::kSpPhi, {{"R", Value::bag(w)}});
      const PartitionedBag parts = partition(w, 3, Partitioner::round_robin(s));
      const Bag ref = testing::floyd_warshall(w);
      CHECK(run_plan_p1(parts, phi, d).result == ref);
      CHECK(run_plan_p2(parts, phi, d).result == ref);
      CHECK(run_plan_p2_repartitioned(parts, phi, d, {{"Tuple", 0}, {"Tuple", 0}}).result == ref);
    }
  }

  TEST_CASE("degenerate clusters and empty seeds") {
    const Aggregator d = Aggregator::distinct();
    const Bag g = gen_erdos_renyi(8, 0.3, 2);
    const Value phi = tc_phi(g);
    const auto p2 = run_plan_p2(partition(g, 1, Partitioner::round_robin(0)), phi, d);
    CHECK(p2.report.final_merge == 0);
    CHECK(p2.report.seed_distribution == 0);
    const auto p2r = run_plan_p2_repartitioned(partition(g, 1, Partitioner::round_robin(0)), phi, d, kSrc);
    CHECK(p2r.result == p2.result);
    CHECK(p2r.report.records_shuffled == 0);

    const auto empty = run_plan_p1(partition({}, 3, Partitioner::round_robin(0)), phi, d);
    CHECK(empty.result.empty());
    CHECK(empty.report.iteration_merge == 0);
    CHECK(empty.report.final_merge == 0);
  }

  TEST_CASE("P2 moves less data than P1 on a sparse random graph") {
    const Bag g = gen_erdos_renyi(100, 0.02, 1);
    const PartitionedBag parts = partition(g, 4, Partitioner::round_robin(1));
    const Aggregator d = Aggregator::distinct();
    const auto p1 = run_plan_p1(parts, tc_phi(g), d);
    const auto p2 = run_plan_p2(parts, tc_phi(g), d);
    const auto p2r = run_plan_p2_repartitioned(parts, tc_phi(g), d, kSrc);
    CHECK(p2.report.records_shuffled < p1.report.records_shuffled);
    CHECK(p2r.report.final_merge == 0);
    CHECK(p2r.report.records_shuffled < p2.report.records_shuffled);
  }

  TEST_CASE("repartitioned fixpoints are disjoint per partition") {
    const Bag cycle = parse_value("{Tuple(0,1), Tuple(1,2), Tuple(2,0)}").as_bag();
    const Value phi = tc_phi(cycle);
    const auto r = run_plan_p2_repartitioned(partition_explicit({cycle}), phi, Aggregator::distinct(), kSrc);
    CHECK(r.result.size() == 9);
    CHECK(r.report.final_merge == 0);
    CHECK(r.report.partitions == 1);

    // Each source's closure computed on its own: three disjoint sets of three pairs.
    std::vector<Bag> per_source;
    for (std::int64_t s = 0; s < 3; ++s) {
      std::vector<Value> seed;
      for (const auto& [e, n] : cycle.entries())
        if (e.args()[0].as_int() == s) seed.push_back(e);
      per_source.push_back(eval_fixpoint(Aggregator::distinct(), Bag::from_values(seed), phi).result);
      CHECK(per_source.back().size() == 3);
    }
    CHECK(bag_union(per_source) == r.result);

    for (std::uint64_t s = 1; s <= 40; ++s) {
      const Bag g = gen_erdos_renyi(9, 0.25, s);
      const PartitionedBag parts = partition(g, 4, Partitioner::by_key_hash(kSrc));
      std::set<Value> seen;
      for (const Bag& part : parts.partitions) {
        const Bag closed = eval_fixpoint(Aggregator::distinct(), part, tc_phi(g)).result;
        for (const auto& [e, n] : closed.entries()) CHECK(seen.insert(e).second);
      }
    }
  }

  TEST_CASE("reports and results do not depend on the task schedule") {
    for (std::uint64_t s = 1; s <= 10; ++s) {
      const Bag g = gen_erdos_renyi(20, 0.1, s);
      const Value phi = tc_phi(g);
      const PartitionedBag parts = partition(g, 6, Partitioner::round_robin(s));
      const Aggregator d = Aggregator::distinct();
      std::vector<PlanResult> p2, p2r, p1;
      for (Schedule sch : {Schedule::Serial, Schedule::Reversed, Schedule::Parallel}) {
        PlanOptions opts;
        opts.schedule = sch;
        p1.push_back(run_plan_p1(parts, phi, d, opts));
        p2.push_back(run_plan_p2(parts, phi, d, opts));
        p2r.push_back(run_plan_p2_repartitioned(parts, phi, d, kSrc, opts));
      }
      for (std::size_t i = 1; i < 3; ++i) {
        CHECK(p1[i].result == p1[0].result);
        CHECK(p1[i].report == p1[0].report);
        CHECK(p2[i].result == p2[0].result);
        CHECK(p2[i].report == p2[0].report);
        CHECK(p2r[i].result == p2r[0].result);
        CHECK(p2r[i].report == p2r[0].report);
      }
    }
  }

  TEST_CASE("per-partition failures surface as errors") {
    const Bag g = gen_erdos_renyi(6, 0.4, 3);
    const Value phi = tc_phi(g);
    PlanOptions opts;
    opts.schedule = Schedule::Parallel;
    opts.limits.max_fixpoint_iterations = 1;
    CHECK_THROWS_AS(run_plan_p2(partition(g, 3, Partitioner::round_robin(0)), phi, Aggregator::distinct(), opts),
                    IterationLimitError);
  }

  TEST_CASE("P2 with hash partitions never charges less when inputs grow") {
    std::mt19937_64 rng(4);
    for (std::uint64_t s = 1; s <= 30; ++s) {
      Bag g = gen_erdos_renyi(10, 0.15, s);
      std::uint64_t prev_p2 = 0, prev_p2r = 0;
      for (int step = 0; step < 5; ++step) {
        const Value phi = tc_phi(g);
        const PartitionedBag parts = partition(g, 3, Partitioner::by_key_hash(kSrc));
        const auto p2 = run_plan_p2(parts, phi, Aggregator::distinct()).report.records_shuffled;
        const auto p2r = run_plan_p2_repartitioned(parts, phi, Aggregator::distinct(), kSrc).report.records_shuffled;
        CHECK(p2 >= prev_p2);
        CHECK(p2r >= prev_p2r);
        prev_p2 = p2;
        prev_p2r = p2r;
        const Value extra = Value::pair(Value::integer(static_cast<std::int64_t>(rng() % 10)),
                                        Value::integer(static_cast<std::int64_t>(rng() % 10)));
        g = bag_union(g, Bag::singleton(extra));
      }
    }
  }

  TEST_CASE("P1 can charge less after an edge is added") {
    // The shortcut leaves the closure unchanged but shortens the loop by more
    // than it adds to each round.
    const Bag line = chain(12);
    const Bag shortcut = bag_union(line, Bag::singleton(Value::pair(Value::integer(0), Value::integer(6))));
    const auto before = run_plan_p1(partition(line, 2, Partitioner::round_robin(0)), tc_phi(line), Aggregator::distinct());
    const auto after =
        run_plan_p1(partition(shortcut, 2, Partitioner::round_robin(0)), tc_phi(shortcut), Aggregator::distinct());
    CHECK(after.report.iterations < before.report.iterations);
    CHECK(after.report.records_shuffled < before.report.records_shuffled);
    CHECK(after.result == before.result);
  }

  TEST_CASE("repartition keys") {
    const TypeEnv tc_env{{"R", TypeExpr::dist_bag(kEdge)}};
    const auto tc = find_repartition_key(tc_env, parse_expr(testing::kTcPhi), kEdge);
    REQUIRE(tc.has_value());
    CHECK(*tc == kSrc);

    const TypeExpr weighted = TypeExpr::pair(kEdge, TypeExpr::int_type());
    const auto sp = find_repartition_key({{"R", TypeExpr::dist_bag(weighted)}}, parse_expr(testing::kSpPhi), weighted);
    REQUIRE(sp.has_value());
    CHECK(to_string(*sp) == "Tuple#0.Tuple#0");

    const TypeEnv movie_env{{"U", parse_type("Bag_l<User(Int,Bag_l<Int>)>")}};
    CHECK_FALSE(find_repartition_key(movie_env, parse_expr(testing::kMovieRecPhi), TypeExpr::int_type()).has_value());
  }

  TEST_CASE("analytic transfer model") {
    using K = ShapeNode::Kind;
    const ShapeNode join_fix = ShapeNode::node(
        K::Join, 0, {ShapeNode::input("A", 10), ShapeNode::node(K::Fixpoint, 100, {ShapeNode::input("R", 20)})});
    CHECK(account_join_shapes(join_fix, 5).total == 610);
    const ShapeNode semijoin = ShapeNode::node(
        K::Join, 0,
        {ShapeNode::input("A", 10),
         ShapeNode::node(K::Fixpoint, 40,
                         {ShapeNode::node(K::Cogroup, 0, {ShapeNode::input("R", 20), ShapeNode::input("A", 10)})})});
    const ShapeCost cost = account_join_shapes(semijoin, 5);
    CHECK(cost.total == 280);
    CHECK(cost.charges.size() == 3);
    CHECK(account_join_shapes(ShapeNode::node(K::Join, 0, {ShapeNode::input("A", 0), ShapeNode::input("B", 0)}), 5).total ==
          0);
    CHECK(account_join_shapes(ShapeNode::node(K::Distinct, 3, {ShapeNode::input("A", 4)}), 3).total == 12);
    CHECK(account_join_shapes(ShapeNode::node(K::GroupBy, 3, {ShapeNode::input("A", 4)}), 3).total == 4);

    const Bag a = parse_value("{Tuple(0,\"x\"), Tuple(1,\"y\")}").as_bag();
    const Bag g = gen_erdos_renyi(8, 0.3, 2);
    const ExprPtr e = parse_expr(std::string("join(A, fix(R, ") + testing::kTcPhi + "))");
    const ShapeNode shape = shape_of(e, testing::env_of({{"A", Value::bag(a)}, {"R", Value::bag(g)}}));
    REQUIRE(shape.kind == K::Join);
    REQUIRE(shape.children.size() == 2);
    CHECK(shape.children[0].size == 2);
    CHECK(shape.children[1].kind == K::Fixpoint);
    CHECK(shape.children[1].size == testing::warshall(g).size());
  }

  TEST_CASE("transfer report text") {
    TransferReport r;
    r.plan = Plan::P2;
    r.partitions = 2;
    r.partition_iterations = {3, 4};
    r.seed_distribution = 5;
    r.final_merge = 7;
    r.total();
    CHECK(r.records_shuffled == 12);
    CHECK(r.to_text() ==
          "plan: P2\nlabel: -\npartitions: 2\niterations: 0\npartition_iterations: 3,4\nseed_distribution: 5\n"
          "iteration_merge: 0\nfinal_merge: 7\nrecords_shuffled: 12\nresult_records: 0\n");
    CHECK(parse_plan("p2r") == Plan::P2Repartitioned);
    CHECK_FALSE(parse_plan("p9").has_value());
  }

  TEST_CASE("run_distributed follows directives and degrades safely") {
    const Program movie = load_benchmark("MovieRec");
    DatasetConfig cfg;
    cfg.n = 6;
    const auto inputs = make_inputs("MovieRec", cfg);
    const EnvPtr env = testing::env_of(inputs);
    const ExprPtr body = inline_lets(movie.body);
    ClusterConfig cluster;
    cluster.partitions = 3;
    const DistributedRun run = run_distributed(body, env, {}, cluster, Plan::P2Repartitioned);
    REQUIRE(run.reports.size() == 1);
    CHECK(run.reports[0].plan == Plan::P2);
    CHECK(run.result == eval(env, body));

    ClusterConfig defaults;
    defaults.cores = 3;
    CHECK(defaults.effective_partitions() == 12);
  }
}
