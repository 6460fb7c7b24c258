// Serial versus OpenMP-parallel partition tasks for the local-fixpoint plans.
// Both schedules produce identical results and reports; only wall time differs.

#include <benchmark/benchmark.h>

#include "mumonoids/dist.hpp"
#include "mumonoids/gen.hpp"
#include "mumonoids/parser.hpp"

namespace {

using namespace mumonoids;

constexpr const char* kTransitiveClosure =
    R"(\X -> flatmap(\(mid, (src, dst)) -> {(src, dst)}, join(flatmap(\(a, b) -> {(b, a)}, X), R)))";

struct Workload {
  PartitionedBag parts;
  Value phi;
};

const Workload& workload(std::int64_t nodes) {
  static std::map<std::int64_t, Workload> cache;
  auto it = cache.find(nodes);
  if (it == cache.end()) {
    const Bag g = gen_erdos_renyi(nodes, 2.0 / static_cast<double>(nodes), 42);
    const EnvPtr env = bind_value(empty_env(), "R", Value::bag(g));
    it = cache.emplace(nodes, Workload{partition(g, 16, Partitioner::round_robin(1)), eval(env, parse_expr(kTransitiveClosure))})
             .first;
  }
  return it->second;
}

void run(benchmark::State& state, Plan plan, Schedule schedule) {
  const Workload& w = workload(state.range(0));
  PlanOptions opts;
  opts.schedule = schedule;
  const Aggregator distinct = Aggregator::distinct();
  const TypePath src{{"Tuple", 0}};
  std::uint64_t records = 0;
  for (auto _ : state) {
    PlanResult r = plan == Plan::P2 ? run_plan_p2(w.parts, w.phi, distinct, opts)
                                    : run_plan_p2_repartitioned(w.parts, w.phi, distinct, src, opts);
    records = r.result.size();
    benchmark::DoNotOptimize(r);
  }
  state.counters["result_records"] = static_cast<double>(records);
}

void P2_Serial(benchmark::State& s) { run(s, Plan::P2, Schedule::Serial); }
void P2_Parallel(benchmark::State& s) { run(s, Plan::P2, Schedule::Parallel); }
void P2r_Serial(benchmark::State& s) { run(s, Plan::P2Repartitioned, Schedule::Serial); }
void P2r_Parallel(benchmark::State& s) { run(s, Plan::P2Repartitioned, Schedule::Parallel); }

BENCHMARK(P2_Serial)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(P2_Parallel)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(P2r_Serial)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(P2r_Parallel)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
