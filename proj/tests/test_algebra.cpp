#include <doctest.h>

#include <random>

#include "mumonoids/aggregation.hpp"
#include "mumonoids/eval.hpp"
#include "mumonoids/gen.hpp"
#include "mumonoids/parser.hpp"
#include "support/oracles.hpp"

using namespace mumonoids;

namespace {

Bag random_pairs(std::mt19937_64& rng, std::size_t max_size) {
  const TypeExpr t = TypeExpr::local_bag(TypeExpr::pair(TypeExpr::int_type(), TypeExpr::int_type()));
  return random_value(t, rng, 5, max_size).as_bag();
}

}  // namespace

TEST_SUITE("algebra") {
  TEST_CASE("bags keep canonical order and counts") {
    const Bag b = Bag::from_values({Value::integer(3), Value::integer(1), Value::integer(3)});
    CHECK(b.size() == 3);
    CHECK(b.distinct_size() == 2);
    CHECK(b.count(Value::integer(3)) == 2);
    CHECK(b.entries()[0].first == Value::integer(1));
    CHECK(to_string(b) == "{1, 3, 3}");
    CHECK(distinct(b).size() == 2);
    CHECK(bag_difference(b, Bag::singleton(Value::integer(3))).count(Value::integer(3)) == 1);
  }

  TEST_CASE("constants sort before constructed values, which sort before bags") {
    const Value c = Value::string("z");
    const Value t = Value::pair(Value::integer(0), Value::integer(0));
    const Value b = Value::bag({});
    CHECK(c < t);
    CHECK(t < b);
    CHECK(compare(b, b) == 0);
  }

  TEST_CASE("union is commutative and associative and adds sizes") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
      const Bag a = random_pairs(rng, 6), b = random_pairs(rng, 6), c = random_pairs(rng, 6);
      CHECK(bag_union(a, b) == bag_union(b, a));
      CHECK(bag_union(bag_union(a, b), c) == bag_union(a, bag_union(b, c)));
      CHECK(bag_union(a, b).size() == a.size() + b.size());
      CHECK(bag_union(bag_difference(a, b), b).size() >= a.size());
    }
  }

  TEST_CASE("canonical text round-trips through the value parser") {
    std::mt19937_64 rng(5);
    const std::vector<TypeExpr> types = {
        parse_type("Int"),
        parse_type("(Int,String)"),
        parse_type("Bag_l<((Int,Int),Int)>"),
        parse_type("Flight(Int,Int,String,String,Int)"),
        parse_type("City(String,Bag_l<Landmark(String,Int)>)"),
        parse_type("Bag_l<Bag_l<Int>>"),
    };
    for (int i = 0; i < 300; ++i) {
      const TypeExpr& t = types[static_cast<std::size_t>(i) % types.size()];
      const Value v = random_value(t, rng);
      INFO(to_string(v));
      CHECK(inhabits(v, t));
      CHECK(parse_value(to_string(v)) == v);
    }
  }

  TEST_CASE("fnv1a matches the published test vectors") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
  }

  TEST_CASE("aggregators satisfy the aggregation laws") {
    const Value odd = eval(empty_env(), parse_expr(R"(\v -> v == 1 or v == 3)"));
    const std::vector<Aggregator> all = {
        Aggregator::identity(), Aggregator::distinct(), Aggregator::min_by_key(), Aggregator::max_by_key(),
        Aggregator::filter(parse_pattern("(k, v)"), "v", odd)};
    std::mt19937_64 rng(3);
    for (const auto& d : all) {
      INFO(d.name());
      CHECK(d.apply({}).empty());
      for (int i = 0; i < 200; ++i) {
        const Bag a = random_pairs(rng, 6), b = random_pairs(rng, 6);
        CHECK(d.apply(bag_union(a, b)) == d.apply(bag_union(d.apply(a), d.apply(b))));
        CHECK(d.apply(d.apply(a)) == d.apply(a));
      }
    }
  }

  TEST_CASE("by-key aggregation keeps the extreme value per key") {
    const Bag b = parse_value("{Tuple(1,5), Tuple(1,2), Tuple(2,7), Tuple(2,7)}").as_bag();
    CHECK(Aggregator::min_by_key().apply(b) == parse_value("{Tuple(1,2), Tuple(2,7)}").as_bag());
    CHECK(Aggregator::max_by_key().apply(b) == parse_value("{Tuple(1,5), Tuple(2,7)}").as_bag());
  }

  TEST_CASE("key locality") {
    const TypePath key{{"Tuple", 0}};
    const TypePath value{{"Tuple", 1}};
    CHECK(Aggregator::distinct().key_local(key));
    CHECK(Aggregator::distinct().key_local(value));
    CHECK(Aggregator::min_by_key().key_local(key));
    CHECK_FALSE(Aggregator::min_by_key().key_local(value));
    CHECK(Aggregator::identity().key_local({}));
  }

  TEST_CASE("compatibility probe") {
    const Bag g = gen_erdos_renyi(7, 0.3, 9);
    const Value phi = testing::close_phi(testing::kTcPhi, {{"R", Value::bag(g)}});
    const SampleGen subsets = [&](std::mt19937_64& rng) {
      std::vector<Value> sub;
      for (const auto& [e, n] : g.entries())
        for (std::uint64_t k = rng() % 3; k > 0; --k) sub.push_back(e);
      return Bag::from_values(std::move(sub));
    };
    CHECK(probe_compatibility(Aggregator::distinct(), phi, subsets, 100).verdict == Verdict::NotRefuted);
    const ProbeResult r = probe_compatibility(Aggregator::min_by_key(), phi, subsets, 200);
    REQUIRE(r.verdict == Verdict::Refuted);
    REQUIRE(r.counterexample.has_value());
    const Aggregator d = Aggregator::min_by_key();
    const Bag& a = *r.counterexample;
    CHECK(d.apply(apply_lambda(phi, Value::bag(d.apply(a))).as_bag()) !=
          d.apply(apply_lambda(phi, Value::bag(a)).as_bag()));
  }

  TEST_CASE("annotations match by label or wildcard") {
    Annotations a;
    a.add("minByKey", "paths");
    a.add("maxByKey", "*");
    CHECK(a.asserts("minByKey", "paths"));
    CHECK_FALSE(a.asserts("minByKey", "other"));
    CHECK(a.asserts("maxByKey", "anything"));
  }
}
