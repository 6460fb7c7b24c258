#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mumonoids/driver.hpp"
#include "mumonoids/error.hpp"
#include "mumonoids/eval.hpp"
#include "mumonoids/gen.hpp"
#include "mumonoids/parser.hpp"
#include "mumonoids/programs.hpp"
#include "support/oracles.hpp"

using namespace mumonoids;
namespace fs = std::filesystem;

namespace {

// Random core terms; they need not typecheck, only parse back to themselves.
class TermGen {
 public:
  explicit TermGen(std::uint64_t seed) : rng_(seed) {}

  ExprPtr term(int depth) {
    if (depth <= 0) return leaf();
    switch (pick(15)) {
      case 0: return leaf();
      case 1: return ex::singleton(term(depth - 1));
      case 2: return ex::lambda(pattern(2), term(depth - 1));
      case 3: return ex::flatmap(ex::lambda(pattern(2), term(depth - 1)), term(depth - 1));
      case 4: return ex::call(pick_of({"+", "<", "==", "and", "member", "min", "setUnion"}), term(depth - 1), term(depth - 1));
      case 5: return ex::construct(pick_of({"Flight", "Path", "User"}), {term(depth - 1), term(depth - 1)});
      case 6: return ex::tuple({term(depth - 1), term(depth - 1)});
      case 7: return ex::reduce(ex::builtin("+"), ex::integer(0), term(depth - 1));
      case 8: return ex::reduce_by_key(ex::builtin(pick_of({"min", "max", "+"})), term(depth - 1));
      case 9: return pick(2) ? ex::join(term(depth - 1), term(depth - 1)) : ex::cogroup(term(depth - 1), term(depth - 1));
      case 10: {
        static const std::vector<AggregatorSpec> deltas = {AggregatorSpec::distinct(), AggregatorSpec::identity(),
                                                            AggregatorSpec::by_key("min"), AggregatorSpec::by_key("max")};
        return ex::fixpoint(deltas[pick(deltas.size())], term(depth - 1),
                            ex::lambda(Pattern::var("X"), term(depth - 1)));
      }
      case 11: return ex::let(pick_of({"x", "y", "acc"}), term(depth - 1), term(depth - 1));
      case 12: return ex::aggregate(pick(2) ? AggregatorSpec::distinct() : AggregatorSpec::by_key("min"), term(depth - 1));
      case 13: return ex::dist(term(depth - 1));
      default: return ex::if_then_else(term(depth - 1), term(depth - 1), term(depth - 1));
    }
  }

 private:
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  std::string pick_of(std::vector<std::string> v) { return v[pick(v.size())]; }
  std::string var_name() { return pick_of({"x", "y", "acc", "R", "S", "X"}); }

  ExprPtr leaf() {
    switch (pick(4)) {
      case 0: return ex::integer(static_cast<std::int64_t>(pick(100)));
      case 1: return ex::string(pick_of({"", "a", "Paris", "with space", "quote\"inside"}));
      case 2: return ex::empty_bag();
      default: return ex::var(var_name());
    }
  }

  Pattern pattern(int depth) {
    // Fresh names per pattern keep variables distinct.
    int next = 0;
    auto fresh = [&]() { return "p" + std::to_string(next++); };
    std::function<Pattern(int)> go = [&](int d) -> Pattern {
      if (d <= 0 || pick(3) == 0) return Pattern::var(fresh());
      if (pick(2)) return Pattern::tuple({go(d - 1), go(d - 1)});
      return Pattern::ctor("Path", {go(d - 1), go(d - 1)});
    };
    return go(depth);
  }

  std::mt19937_64 rng_;
};

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::string program(const char* name) { return (fs::path(MUMONOIDS_SOURCE_DIR) / "programs" / name).string(); }

std::uint64_t field(const std::string& text, const std::string& key, std::size_t from = 0) {
  const auto at = text.find(key + ": ", from);
  REQUIRE(at != std::string::npos);
  return std::stoull(text.substr(at + key.size() + 2));
}

}  // namespace

TEST_SUITE("cli-frontend") {
  TEST_CASE("surface sugar expands to core terms") {
    const ExprPtr g = parse_expr("groupBy(E)");
    const auto* rbk = g->as<node::ReduceByKey>();
    REQUIRE(rbk);
    CHECK(print_expr(rbk->op).find("++") != std::string::npos);
    CHECK(rbk->src->is<node::Flatmap>());

    const auto parts = as_if(*parse_expr("if c then a else b"));
    REQUIRE(parts.has_value());
    CHECK(structurally_equal(*parts->cond, *ex::var("c")));
    CHECK(parse_expr("if c then a else b")->is<node::Apply>());

    const auto* tuple = parse_expr("(a, b)")->as<node::Construct>();
    REQUIRE(tuple);
    CHECK(tuple->name == "Tuple");
    CHECK(tuple->args.size() == 2);
    CHECK(parse_expr("{1, 2}")->is<node::Const>());
    CHECK(parse_expr("{x}")->is<node::Singleton>());
  }

  TEST_CASE("syntax errors name their position") {
    try {
      parse_program("input R : Bag_d<Int>;\nflatmap(\\x -> {x}, R");
      FAIL("expected a syntax error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Syntax);
    }
    CHECK_THROWS_AS(parse_type("Bag_q<Int>"), Error);
  }

  TEST_CASE("benchmark programs round-trip through the printer") {
    for (const auto& bp : benchmark_programs()) {
      const Program p = parse_program(bp.source);
      const Program again = parse_program(print_program(p));
      INFO(bp.id);
      CHECK(structurally_equal(*p.body, *again.body));
      CHECK(again.type_env() == p.type_env());
      CHECK(again.annotations.compatible == p.annotations.compatible);
    }
    const Program words = parse_program(kWordsSource);
    CHECK(structurally_equal(*words.body, *parse_program(print_program(words)).body));
  }

  TEST_CASE("random core terms round-trip through the printer") {
    TermGen gen(2024);
    for (int i = 0; i < 300; ++i) {
      const ExprPtr e = gen.term(1 + i % 5);
      const std::string text = print_expr(e);
      INFO(text);
      ExprPtr back;
      CHECK_NOTHROW(back = parse_expr(text));
      if (back) CHECK(structurally_equal(*e, *back));
    }
  }

  TEST_CASE("generators") {
    CHECK(gen_erdos_renyi(4, 1.0, 1).size() == 12);
    CHECK(gen_erdos_renyi(100, 0.0, 1).empty());
    // Every ordered pair is a candidate edge, so the mean is n(n-1)p = 99990.
    const auto big = gen_erdos_renyi(10000, 0.001, 1).size();
    CHECK(big > 98500);
    CHECK(big < 101500);
    CHECK(gen_erdos_renyi(20, 0.2, 5) == gen_erdos_renyi(20, 0.2, 5));
    const Bag dag = gen_dag(20, 0.5, 3);
    for (const auto& [e, n] : dag.entries()) CHECK(e.args()[0].as_int() < e.args()[1].as_int());
    const Bag weighted = gen_erdos_renyi(10, 0.5, 3, true);
    for (const auto& [e, n] : weighted.entries()) {
      CHECK(e.args()[1].as_int() >= 0);
      CHECK(e.args()[1].as_int() <= 5);
    }
    CHECK(gen_users(5, 10, 3, 1).size() == 5);
  }

  TEST_CASE("edge and record files round-trip") {
    const fs::path dir = fs::temp_directory_path() / "mumonoids_frontend_test";
    fs::create_directories(dir);
    const Bag w = gen_erdos_renyi(8, 0.3, 4, true);
    write_edges(dir / "w.tsv", w);
    CHECK(read_edges(dir / "w.tsv") == w);
    const Bag f = gen_flights(3, 6, 2);
    write_records(dir / "f.txt", f);
    CHECK(read_records(dir / "f.txt") == f);
    CHECK(load_input(dir / "f.txt", parse_type("Bag_d<Flight(Int,Int,String,String,Int)>")) == f);
    CHECK_THROWS_AS(load_input(dir / "f.txt", parse_type("Bag_d<(Int,Int)>")), Error);
    fs::remove_all(dir);
  }

  TEST_CASE("every example program evaluates to its reference answer") {
    for (const auto& bp : benchmark_programs()) {
      const Program p = parse_program(bp.source);
      DatasetConfig cfg;
      cfg.n = 6;
      cfg.acyclic = true;
      const auto inputs = make_inputs(bp.id, cfg);
      const Value v = eval(testing::env_of(inputs), p.body);
      INFO(bp.id);
      CHECK(v.is_bag());
      if (bp.id == "TC") CHECK(v.as_bag() == testing::warshall(inputs.at("R").as_bag()));
      if (bp.id == "SP") CHECK(v.as_bag() == testing::floyd_warshall(inputs.at("R").as_bag()));
    }
  }

  TEST_CASE("check, optimize and run on the shipped programs") {
    const CliResult check = cli({"check", program("tc.mm")});
    CHECK(check.code == 0);
    CHECK(check.out.find("ok") != std::string::npos);

    const CliResult sp = cli({"run", program("sp.mm"), "--plan", "p2"});
    CHECK(sp.code == 0);
    CHECK(sp.out.find("Tuple(Tuple(0,2),2)") != std::string::npos);

    const CliResult explain = cli({"optimize", program("sp_filter.mm"), "--explain"});
    CHECK(explain.code == 0);
    CHECK(explain.out.find("PF applied") != std::string::npos);
    CHECK(explain.out.find("PA applied") != std::string::npos);

    const CliResult p1 = cli({"run", program("tc.mm"), "--plan", "p1", "--partitions", "4"});
    const CliResult p2 = cli({"run", program("tc.mm"), "--plan", "p2", "--partitions", "4"});
    CHECK(p1.code == 0);
    CHECK(p2.code == 0);
    CHECK(field(p2.out, "records_shuffled") < field(p1.out, "records_shuffled"));
    CHECK(p1.out.substr(0, p1.out.find("records_shuffled")) == p2.out.substr(0, p2.out.find("records_shuffled")));

    for (const char* name : {"tc_filter.mm", "flights.mm", "path_planning.mm", "movie_rec.mm", "words.mm"}) {
      INFO(name);
      CHECK(cli({"run", program(name), "--parallel"}).code == 0);
    }
  }

  TEST_CASE("bench compares both pipelines") {
    const CliResult r = cli({"bench", "TC", "--n", "100", "--p", "0.02"});
    REQUIRE(r.code == 0);
    const auto optimized = r.out.find("[optimized]");
    REQUIRE(optimized != std::string::npos);
    CHECK(field(r.out, "records_shuffled", optimized) < field(r.out, "records_shuffled"));
    CHECK(r.out.find("results_agree: yes") != std::string::npos);
  }

  TEST_CASE("exit codes") {
    CHECK(cli({}).code == kUsageExit);
    CHECK(cli({"run"}).code == kUsageExit);
    CHECK(cli({"run", program("tc.mm"), "--plan", "p7"}).code != 0);
    const CliResult missing = cli({"run", "no_such_program.mm"});
    CHECK(missing.code == exit_code(ErrorKind::Io));
    CHECK(missing.err.find("error:") == 0);

    const fs::path bad = fs::temp_directory_path() / "mumonoids_bad.mm";
    std::ofstream(bad) << "input R : Bag_d<Int>;\nflatmap(\\x -> R, R)\n";
    CHECK(cli({"check", bad.string()}).code == exit_code(ErrorKind::Type));
    fs::remove(bad);
  }
}
