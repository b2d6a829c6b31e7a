// Graph algorithms expressed as programs over the shared IR, plus
// brute-force oracles computed by ordinary graph code. Tests compare the
// two routes; neither may be implemented in terms of the other.
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "matlang/eval.hpp"
#include "matlang/ir.hpp"

namespace matlang {

struct GraphEdge {
  std::size_t from = 0;  // 1-based
  std::size_t to = 0;
  std::int64_t weight = 1;
};

struct GraphSpec {
  std::size_t n = 0;
  std::vector<GraphEdge> edges;
  bool directed = true;
};

struct ProgramDef {
  Schema schema;
  Expr expr;
};

// for { X := pickany(X + (A * X)) } (ones(A), diag(ones(A))) over bool.
// Row u of the result holds a single 1 in the column of u's component
// label, which converges to the component's minimum vertex id.
ProgramDef wcc_program();

// for { R := R + (A' * R) } (S, S) over bool: R_i ends true exactly when
// vertex i is reachable from the sources marked in S.
ProgramDef reach_program();

// Canonical-loop transcription of the reach display, shipped for lowering
// differentials only: each iteration adds row b_i of A outright, so its
// value is not reachability.
ProgramDef reach_for_program();

// The reach loop over int_min_plus: R_i ends at the shortest distance
// from the source (+inf when unreachable).
ProgramDef sssp_program();

// ones(V)' * V over int.
ProgramDef vec_sum_program();

// let W = apply[cast to int_max_plus](V) in ones(W)' * W. The cast sends
// 0 to -inf (additive identities map to each other), so the max reading
// is meaningful for positive entries.
ProgramDef vec_max_program();

// Adjacency builders; undirected specs fill both triangles. Duplicate
// edges combine by the ring's addition (or / min).
Matrix bool_adjacency(const GraphSpec& g);
Matrix min_plus_adjacency(const GraphSpec& g);
Matrix bool_source(std::size_t n, std::size_t s);      // n x 1, true at s
Matrix min_plus_source(std::size_t n, std::size_t s);  // 0 at s, +inf else

// Reads a bool or int_min_plus square matrix back into an edge list
// (directed). Throws std::invalid_argument on other shapes or rings.
GraphSpec graph_from_matrix(const Matrix& m);

// Union-find labels, one per vertex (1-based ids), each component labelled
// by its minimum vertex; edge direction is ignored.
std::vector<std::size_t> oracle_wcc(const GraphSpec& g);

// Breadth-first search from s (1-based); respects g.directed.
std::vector<bool> oracle_reach(const GraphSpec& g, std::size_t s);

// Bellman-Ford from s; nullopt marks unreachable vertices. Weights must be
// nonnegative.
std::vector<std::optional<std::int64_t>> oracle_sssp(const GraphSpec& g,
                                                     std::size_t s);

// Extracts the single true column (1-based) of each row of a bool matrix.
std::vector<std::size_t> wcc_labels(const Matrix& x);

// Edge included with probability density over all ordered (directed) or
// unordered (undirected) pairs of distinct vertices; no self loops.
GraphSpec random_graph(std::mt19937_64& rng, std::size_t n, double density,
                       bool directed);
// Directed, weights uniform in 0..weight_max.
GraphSpec random_weighted_graph(std::mt19937_64& rng, std::size_t n,
                                double density, std::int64_t weight_max);

}  // namespace matlang
