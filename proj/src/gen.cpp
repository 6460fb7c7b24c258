#include "mumonoids/gen.hpp"

#include <fstream>
#include <sstream>

#include "mumonoids/error.hpp"
#include "mumonoids/parser.hpp"

namespace mumonoids {

namespace {

void check_graph_params(std::int64_t n, double p) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "generator", "node count must be at least 1");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "generator", "edge probability must be in [0, 1]");
}

Value edge(std::int64_t s, std::int64_t d, bool weighted, std::mt19937_64& rng) {
  Value e = Value::pair(Value::integer(s), Value::integer(d));
  if (!weighted) return e;
  std::uniform_int_distribution<std::int64_t> w(0, 5);
  return Value::pair(e, Value::integer(w(rng)));
}

// Visits the indices of successes in a sequence of `total` Bernoulli(p) trials,
// skipping geometrically so sparse graphs cost O(edges).
template <class F>
void bernoulli_indices(std::uint64_t total, double p, std::mt19937_64& rng, F&& f) {
  if (p <= 0.0 || total == 0) return;
  if (p >= 1.0) {
    for (std::uint64_t i = 0; i < total; ++i) f(i);
    return;
  }
  std::geometric_distribution<std::uint64_t> skip(p);
  for (std::uint64_t i = skip(rng); i < total; i += 1 + skip(rng)) f(i);
}

Bag graph(std::int64_t n, double p, std::uint64_t seed, bool weighted, bool acyclic) {
  check_graph_params(n, p);
  std::mt19937_64 rng(seed);
  std::mt19937_64 weights(seed ^ 0x9e3779b97f4a7c15ULL);
  const auto un = static_cast<std::uint64_t>(n);
  std::vector<Value> out;
  bernoulli_indices(un * (un - 1), p, rng, [&](std::uint64_t i) {
    const auto s = static_cast<std::int64_t>(i / (un - 1));
    auto d = static_cast<std::int64_t>(i % (un - 1));
    if (d >= s) ++d;
    if (acyclic && s >= d) return;
    out.push_back(edge(s, d, weighted, weights));
  });
  return Bag::from_values(std::move(out));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> f;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) f.push_back(tok);
  return f;
}

std::int64_t to_int(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::Io, "input", path.string() + ":" + std::to_string(line) + ": not an integer: " + s);
}

}  // namespace

Bag gen_erdos_renyi(std::int64_t n, double p, std::uint64_t seed, bool weighted) {
  return graph(n, p, seed, weighted, false);
}

Bag gen_dag(std::int64_t n, double p, std::uint64_t seed, bool weighted) { return graph(n, p, seed, weighted, true); }

Bag gen_flights(std::int64_t airports, std::int64_t flights, std::uint64_t seed) {
  if (airports < 2 || flights < 0) throw Error(ErrorKind::InvalidArgument, "generator", "need at least 2 airports");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> airport(0, airports - 1), dep_time(0, 19), duration(1, 4);
  std::vector<Value> out;
  for (std::int64_t i = 0; i < flights; ++i) {
    const auto a = airport(rng);
    auto b = airport(rng);
    if (b == a) b = (a + 1) % airports;
    const auto d = dep_time(rng);
    const auto dur = duration(rng);
    out.push_back(Value::constructed("Flight", {Value::integer(d), Value::integer(d + dur),
                                                Value::string("A" + std::to_string(a)),
                                                Value::string("A" + std::to_string(b)), Value::integer(dur)}));
  }
  return Bag::from_values(std::move(out));
}

Bag gen_routes(std::int64_t cities, double p, std::int64_t max_landmarks, std::uint64_t seed) {
  check_graph_params(cities, p);
  if (max_landmarks < 0) throw Error(ErrorKind::InvalidArgument, "generator", "landmark count must be non-negative");
  std::mt19937_64 rng(seed);
  std::vector<Value> city;
  std::uniform_int_distribution<std::int64_t> count(0, max_landmarks), rating(1, 5);
  std::uniform_int_distribution<std::int64_t> pool(0, std::max<std::int64_t>(0, 2 * max_landmarks - 1));
  for (std::int64_t i = 0; i < cities; ++i) {
    const std::string name = i == 0 ? "Paris" : i == 1 ? "Geneva" : "C" + std::to_string(i);
    BagBuilder marks;
    const auto k = count(rng);
    for (std::int64_t j = 0; j < k; ++j) {
      // One rating per landmark name, so a landmark is the same record wherever it appears.
      const auto id = pool(rng);
      std::mt19937_64 r(seed * 31 + static_cast<std::uint64_t>(id));
      marks.add(Value::constructed("Landmark", {Value::string("L" + std::to_string(id)), Value::integer(rating(r))}));
    }
    city.push_back(Value::constructed("City", {Value::string(name), Value::bag(distinct(marks.build()))}));
  }
  const Bag edges = gen_erdos_renyi(cities, p, seed + 1);
  std::vector<Value> out;
  for (const auto& [e, c] : edges.entries()) {
    out.push_back(Value::pair(city[static_cast<std::size_t>(e.args()[0].as_int())],
                              city[static_cast<std::size_t>(e.args()[1].as_int())]));
  }
  return Bag::from_values(std::move(out));
}

Bag gen_users(std::int64_t users, std::int64_t movies, std::int64_t max_movies, std::uint64_t seed) {
  if (users < 0 || movies < 1 || max_movies < 1) {
    throw Error(ErrorKind::InvalidArgument, "generator", "invalid user generator parameters");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> count(1, max_movies), movie(0, movies - 1);
  std::vector<Value> out;
  for (std::int64_t u = 0; u < users; ++u) {
    BagBuilder liked;
    const auto k = count(rng);
    for (std::int64_t j = 0; j < k; ++j) liked.add(Value::integer(movie(rng)));
    out.push_back(Value::constructed("User", {Value::integer(u), Value::bag(distinct(liked.build()))}));
  }
  return Bag::from_values(std::move(out));
}

Value random_value(const TypeExpr& t, std::mt19937_64& rng, std::int64_t int_range, std::size_t max_bag) {
  switch (t.kind()) {
    case TypeKind::Basic: {
      std::uniform_int_distribution<std::int64_t> d(0, int_range - 1);
      const auto& n = t.basic_name();
      if (n == "Int") return Value::integer(d(rng));
      if (n == "Float") return Value::floating(static_cast<double>(d(rng)) / 2.0);
      if (n == "String") return Value::string(std::string(1, static_cast<char>('a' + d(rng) % 26)));
      break;
    }
    case TypeKind::Sum: {
      const auto& cases = t.cases();
      std::uniform_int_distribution<std::size_t> pick(0, cases.size() - 1);
      const SumCase& c = cases[pick(rng)];
      std::vector<Value> args;
      for (const auto& p : c.params) args.push_back(random_value(p, rng, int_range, max_bag));
      return Value::constructed(c.name, std::move(args));
    }
    case TypeKind::LocalBag:
    case TypeKind::DistBag: {
      std::uniform_int_distribution<std::size_t> len(0, max_bag);
      std::vector<Value> items;
      const auto n = len(rng);
      for (std::size_t i = 0; i < n; ++i) items.push_back(random_value(t.elem(), rng, int_range, max_bag));
      return Value::bag(Bag::from_values(std::move(items)));
    }
    case TypeKind::Bottom: return Value::bag(Bag{});
    default: break;
  }
  throw Error(ErrorKind::InvalidArgument, "generator", "cannot generate values of type " + to_string(t));
}

Bag read_edges(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "input", "cannot open " + path.string());
  std::vector<Value> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_fields(line);
    if (f.empty()) continue;
    if (f.size() != 2 && f.size() != 3) {
      throw Error(ErrorKind::Io, "input", path.string() + ":" + std::to_string(lineno) + ": expected 2 or 3 fields");
    }
    Value e = Value::pair(Value::integer(to_int(f[0], path, lineno)), Value::integer(to_int(f[1], path, lineno)));
    if (f.size() == 3) e = Value::pair(e, Value::integer(to_int(f[2], path, lineno)));
    out.push_back(e);
  }
  return Bag::from_values(std::move(out));
}

void write_edges(const std::filesystem::path& path, const Bag& edges) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "output", "cannot write " + path.string());
  for (const auto& [e, c] : edges.entries()) {
    std::string line;
    if (e.is_pair() && e.args()[0].is_pair()) {
      const auto se = e.args()[0].args();
      line = to_string(se[0]) + "\t" + to_string(se[1]) + "\t" + to_string(e.args()[1]);
    } else if (e.is_pair()) {
      line = to_string(e.args()[0]) + "\t" + to_string(e.args()[1]);
    } else {
      throw Error(ErrorKind::InvalidArgument, "output", "not an edge: " + to_string(e));
    }
    for (std::uint64_t i = 0; i < c; ++i) out << line << '\n';
  }
}

Bag read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "input", "cannot open " + path.string());
  std::vector<Value> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      out.push_back(parse_value(line));
    } catch (const Error& e) {
      throw Error(ErrorKind::Io, "input", path.string() + ":" + std::to_string(lineno) + ": " + e.detail());
    }
  }
  return Bag::from_values(std::move(out));
}

void write_records(const std::filesystem::path& path, const Bag& records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "output", "cannot write " + path.string());
  for (const auto& [v, c] : records.entries()) {
    for (std::uint64_t i = 0; i < c; ++i) out << to_string(v) << '\n';
  }
}

Bag load_input(const std::filesystem::path& path, const TypeExpr& bag_type) {
  if (!bag_type.is_bag()) throw Error(ErrorKind::InvalidArgument, "input", "inputs must have a bag type");
  const TypeExpr edge_t = TypeExpr::pair(TypeExpr::int_type(), TypeExpr::int_type());
  const TypeExpr wedge_t = TypeExpr::pair(edge_t, TypeExpr::int_type());
  const bool edges = path.extension() == ".tsv" && (bag_type.elem() == edge_t || bag_type.elem() == wedge_t);
  Bag b = edges ? read_edges(path) : read_records(path);
  for (const auto& [v, c] : b.entries()) {
    if (!inhabits(v, bag_type.elem())) {
      throw Error(ErrorKind::Io, "input", path.string() + ": record " + to_string(v) + " is not of type " +
                                              to_string(bag_type.elem()));
    }
  }
  return b;
}

}  // namespace mumonoids
