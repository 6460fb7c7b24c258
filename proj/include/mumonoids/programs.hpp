#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "mumonoids/parser.hpp"
#include "mumonoids/value.hpp"

namespace mumonoids {

struct BenchmarkProgram {
  std::string id;      // TC, SP, TC-filter, SP-filter, Flights, PathPlanning, MovieRec
  std::string source;  // surface syntax, inputs declared without files
};

std::span<const BenchmarkProgram> benchmark_programs();
const BenchmarkProgram& benchmark_program(std::string_view id);
Program load_benchmark(std::string_view id);

// The distinct-letter words example over the letters a, b, c.
extern const char* const kWordsSource;

struct DatasetConfig {
  std::int64_t n = 8;     // nodes, airports, cities or users depending on the program
  double p = 0.25;        // edge probability for graph-shaped data
  std::uint64_t seed = 1;
  bool acyclic = false;   // generate DAGs, for programs that only terminate on them
};

// Synthetic inputs for every declared input of a benchmark program.
std::map<std::string, Value> make_inputs(std::string_view id, const DatasetConfig& cfg);

}  // namespace mumonoids
