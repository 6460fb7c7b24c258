#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "mumonoids/types.hpp"
#include "mumonoids/value.hpp"

namespace mumonoids {

// Directed Erdos-Renyi graph on nodes 0..n-1 without self loops. Each ordered
// pair is an edge with probability p. Weighted edges are ((src, dst), w) with
// w uniform in [0, 5]; unweighted edges are (src, dst).
Bag gen_erdos_renyi(std::int64_t n, double p, std::uint64_t seed, bool weighted = false);
// Same, restricted to edges src < dst, so every path is finite.
Bag gen_dag(std::int64_t n, double p, std::uint64_t seed, bool weighted = false);

// Flight(dtime, atime, dep, dest, dur) records between airports "A0".."A{k-1}",
// departures uniform in [0, 20), durations uniform in [1, 4].
Bag gen_flights(std::int64_t airports, std::int64_t flights, std::uint64_t seed);

// Routes (City(name, landmarks), City(name, landmarks)) over an Erdos-Renyi
// graph of cities. City 0 is "Paris", city 1 is "Geneva", the rest "C<i>".
// Each city gets 0..max_landmarks landmarks Landmark(name, rating), rating
// uniform in [1, 5], drawn from a pool of 2 * max_landmarks names.
Bag gen_routes(std::int64_t cities, double p, std::int64_t max_landmarks, std::uint64_t seed);

// User(id, best_movies) records; each user likes 1..max_movies movies drawn
// uniformly from 0..movies-1.
Bag gen_users(std::int64_t users, std::int64_t movies, std::int64_t max_movies, std::uint64_t seed);

// Random value inhabiting t. Ints are drawn from [0, int_range), bags have at
// most max_bag elements. Rigid and function types are rejected.
Value random_value(const TypeExpr& t, std::mt19937_64& rng, std::int64_t int_range = 8, std::size_t max_bag = 4);

// Edge files: one edge per line, tab separated `src dst [weight]`.
Bag read_edges(const std::filesystem::path& path);
void write_edges(const std::filesystem::path& path, const Bag& edges);

// Record files: one value per line in the canonical text encoding; blank
// lines and lines starting with '#' are skipped.
Bag read_records(const std::filesystem::path& path);
void write_records(const std::filesystem::path& path, const Bag& records);

// Reads an input according to its declared type: .tsv files holding
// (Int,Int) or ((Int,Int),Int) elements are edge files, anything else is a
// record file. The result is checked against the element type.
Bag load_input(const std::filesystem::path& path, const TypeExpr& bag_type);

}  // namespace mumonoids
