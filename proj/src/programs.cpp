#include "mumonoids/programs.hpp"

#include <array>

#include "mumonoids/error.hpp"
#include "mumonoids/gen.hpp"

namespace mumonoids {

namespace {

const std::array<BenchmarkProgram, 7>& table() {
  static const std::array<BenchmarkProgram, 7> t{{
      {"TC", R"(# Transitive closure of a directed graph given as (src, dst) edges.
input R : Bag_d<(Int,Int)>;
let reverse_edges = \(a, b) -> {(b, a)} in
let drop_mid = \(mid, (src, dst)) -> {(src, dst)} in
fix(R, \X -> flatmap(drop_mid, join(flatmap(reverse_edges, X), R)))
)"},
      {"SP", R"(# Shortest distances between all pairs of nodes of a weighted graph.
input R : Bag_d<((Int,Int),Int)>;
assume compatible(minByKey, all_paths);
let key_dst = \((src, dst), w) -> {(dst, (src, w))} in
let key_src = \((src, dst), w) -> {(src, (dst, w))} in
let combine = \(mid, ((src, w1), (dst, w2))) -> {((src, dst), w1 + w2)} in
let all_paths = fix(R, \X -> flatmap(combine, join(flatmap(key_dst, X), flatmap(key_src, R)))) in
reduceByKey(min, all_paths)
)"},
      {"TC-filter", R"(# Reachability from the nodes in S.
input R : Bag_d<(Int,Int)>;
input S : Bag_l<Int>;
let reverse_edges = \(a, b) -> {(b, a)} in
let drop_mid = \(mid, (src, dst)) -> {(src, dst)} in
let closure = fix(R, \X -> flatmap(drop_mid, join(flatmap(reverse_edges, X), R))) in
flatmap(\(src, dst) -> if member src S then {(src, dst)} else {}, closure)
)"},
      {"SP-filter", R"(# Shortest distances from the nodes in S.
input R : Bag_d<((Int,Int),Int)>;
input S : Bag_l<Int>;
assume compatible(minByKey, all_paths);
let key_dst = \((src, dst), w) -> {(dst, (src, w))} in
let key_src = \((src, dst), w) -> {(src, (dst, w))} in
let combine = \(mid, ((src, w1), (dst, w2))) -> {((src, dst), w1 + w2)} in
let all_paths = fix(R, \X -> flatmap(combine, join(flatmap(key_dst, X), flatmap(key_src, R)))) in
reduceByKey(min, flatmap(\((src, dst), w) -> if member src S then {((src, dst), w)} else {}, all_paths))
)"},
      {"Flights", R"(# Every journey that can be made by chaining connecting flights.
input R : Bag_d<Flight(Int,Int,String,String,Int)>;
let corr_possible = \(corr, (Flight(dtime1, atime1, dep1, dest1, dur1), Flight(dtime2, atime2, dep2, dest2, dur2))) ->
  if atime1 < dtime2 then {Flight(dtime1, atime2, dep1, dest2, dur1 + dur2)} else {} in
let key_dest = \Flight(dtime, atime, dep, dest, dur) -> {(dest, Flight(dtime, atime, dep, dest, dur))} in
let key_dep = \Flight(dtime, atime, dep, dest, dur) -> {(dep, Flight(dtime, atime, dep, dest, dur))} in
fix(R, \X -> flatmap(corr_possible, join(flatmap(key_dest, X), flatmap(key_dep, R))))
)"},
      {"PathPlanning", R"(# Best-rated set of landmarks on a route from Paris to Geneva.
input R : Bag_d<(City(String,Bag_l<Landmark(String,Int)>),City(String,Bag_l<Landmark(String,Int)>))>;
let paths = \(City(n1, l1), City(n2, l2)) -> {(Path(n1, n2), setUnion l1 l2)} in
let key_name_dep = \(Path(s, d), l) -> {(s, (Path(s, d), l))} in
let key_name_dest = \(Path(s, d), l) -> {(d, (Path(s, d), l))} in
let combine = \(k, ((Path(s1, d1), l1), (Path(s2, d2), l2))) -> {(Path(s1, d2), setUnion l1 l2)} in
let all_paths = fix(flatmap(paths, R),
  \X -> flatmap(combine, join(flatmap(key_name_dest, X), flatmap(key_name_dep, flatmap(paths, R))))) in
flatmap(\(Path(s, d), l) -> if s == "Paris" and d == "Geneva" then {(Path(s, d), l)} else {},
  reduceByKey(bestRated, flatmap(\(p, l) -> {(p, l)}, all_paths)))
)"},
      {"MovieRec", R"(# Movies recommended from a starting set S through users' favourites.
input S : Bag_d<Int>;
input U : Bag_l<User(Int,Bag_l<Int>)>;
let users_who_like = \x -> flatmap(\User(u, bm) -> if member x bm then bm else {}, U) in
fix(S, \X -> flatmap(users_who_like, X))
)"},
  }};
  return t;
}

Bag first_nodes(std::int64_t n, std::int64_t k) {
  std::vector<Value> v;
  for (std::int64_t i = 0; i < std::min(n, k); ++i) v.push_back(Value::integer(i));
  return Bag::from_values(std::move(v));
}

}  // namespace

const char* const kWordsSource = R"(# Words without repeated letters over the alphabet C.
input C : Bag_l<String>;
let appendToWords = \X -> flatmap(\x -> flatmap(\c -> if contains x c then {} else {x + c}, C), X) in
fix(C, appendToWords)
)";

std::span<const BenchmarkProgram> benchmark_programs() { return table(); }

const BenchmarkProgram& benchmark_program(std::string_view id) {
  for (const auto& p : table())
    if (p.id == id) return p;
  throw Error(ErrorKind::InvalidArgument, "benchmark", "unknown benchmark program " + std::string(id));
}

Program load_benchmark(std::string_view id) { return parse_program(benchmark_program(id).source); }

std::map<std::string, Value> make_inputs(std::string_view id, const DatasetConfig& cfg) {
  std::map<std::string, Value> in;
  auto graph = [&](bool weighted) {
    return cfg.acyclic ? gen_dag(cfg.n, cfg.p, cfg.seed, weighted) : gen_erdos_renyi(cfg.n, cfg.p, cfg.seed, weighted);
  };
  const std::int64_t sources = std::max<std::int64_t>(1, cfg.n / 4);
  if (id == "TC") {
    in["R"] = Value::bag(graph(false));
  } else if (id == "SP") {
    in["R"] = Value::bag(graph(true));
  } else if (id == "TC-filter") {
    in["R"] = Value::bag(graph(false));
    in["S"] = Value::bag(first_nodes(cfg.n, sources));
  } else if (id == "SP-filter") {
    in["R"] = Value::bag(graph(true));
    in["S"] = Value::bag(first_nodes(cfg.n, sources));
  } else if (id == "Flights") {
    in["R"] = Value::bag(gen_flights(std::max<std::int64_t>(2, cfg.n), 3 * cfg.n, cfg.seed));
  } else if (id == "PathPlanning") {
    in["R"] = Value::bag(gen_routes(std::max<std::int64_t>(2, cfg.n), cfg.p, 3, cfg.seed));
  } else if (id == "MovieRec") {
    const std::int64_t movies = std::max<std::int64_t>(4, 2 * cfg.n);
    in["U"] = Value::bag(gen_users(cfg.n, movies, 3, cfg.seed));
    in["S"] = Value::bag(first_nodes(movies, 2));
  } else {
    throw Error(ErrorKind::InvalidArgument, "benchmark", "unknown benchmark program " + std::string(id));
  }
  return in;
}

}  // namespace mumonoids
