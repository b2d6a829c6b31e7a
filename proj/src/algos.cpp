#include "matlang/algos.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <stdexcept>

#include "matlang/rewrite.hpp"

namespace matlang {

namespace {

Schema square_schema(const char* name, Ring r, const char* size = "n") {
  SizeTerm n = SizeTerm::sym(size);
  Schema s;
  s.emplace(name, MatrixType{n, n, r});
  return s;
}

void add_source(Schema& s, const char* name, Ring r) {
  s.emplace(name, MatrixType{SizeTerm::sym("n"), SizeTerm::one(), r});
}

Expr reach_body(Ring r) {
  return apply(make_add_fn(r),
               {var("R"), matmul(transpose(var("A")), var("R"))});
}

}  // namespace

ProgramDef wcc_program() {
  Expr a = var("A");
  Expr body = pickany(
      apply(make_add_fn(Ring::Bool), {var("X"), matmul(a, var("X"))}));
  Expr e = for_counted(ones(a), {Binding{"X", std::move(body)}},
                       {diag(ones(a))});
  return {square_schema("A", Ring::Bool, "a"), std::move(e)};
}

ProgramDef reach_program() {
  Schema s = square_schema("A", Ring::Bool);
  add_source(s, "S", Ring::Bool);
  Expr e = for_counted(var("S"), {Binding{"R", reach_body(Ring::Bool)}},
                       {var("S")});
  return {std::move(s), std::move(e)};
}

ProgramDef reach_for_program() {
  Schema s = square_schema("A", Ring::Bool);
  add_source(s, "S", Ring::Bool);
  Expr body = apply(
      make_add_fn(Ring::Bool),
      {var("R"), transpose(matmul(transpose(var("v")), var("A")))});
  Expr e = for_canonical("v", {Binding{"R", std::move(body)}}, {var("S")});
  return {std::move(s), std::move(e)};
}

ProgramDef sssp_program() {
  Schema s = square_schema("A", Ring::IntMinPlus);
  add_source(s, "S", Ring::IntMinPlus);
  Expr e = for_counted(var("S"), {Binding{"R", reach_body(Ring::IntMinPlus)}},
                       {var("S")});
  return {std::move(s), std::move(e)};
}

ProgramDef vec_sum_program() {
  Schema s;
  add_source(s, "V", Ring::Int);
  Expr e = matmul(transpose(ones(var("V"))), var("V"));
  return {std::move(s), std::move(e)};
}

ProgramDef vec_max_program() {
  Schema s;
  add_source(s, "V", Ring::Int);
  Expr cast = apply(make_cast_fn(Ring::Int, Ring::IntMaxPlus), {var("V")});
  Expr e = let_in("W", std::move(cast),
                  matmul(transpose(ones(var("W"))), var("W")));
  return {std::move(s), std::move(e)};
}

namespace {

void check_endpoint(const GraphSpec& g, std::size_t v) {
  if (v < 1 || v > g.n)
    throw std::invalid_argument("edge endpoint " + std::to_string(v) +
                                " is outside 1.." + std::to_string(g.n));
}

}  // namespace

Matrix bool_adjacency(const GraphSpec& g) {
  Matrix m(g.n, g.n, Ring::Bool);
  for (const auto& e : g.edges) {
    check_endpoint(g, e.from);
    check_endpoint(g, e.to);
    m.set(e.from - 1, e.to - 1, ScalarValue::of_bool(true));
    if (!g.directed) m.set(e.to - 1, e.from - 1, ScalarValue::of_bool(true));
  }
  return m;
}

Matrix min_plus_adjacency(const GraphSpec& g) {
  Matrix m(g.n, g.n, Ring::IntMinPlus);
  auto relax = [&](std::size_t r, std::size_t c, std::int64_t w) {
    ScalarValue v = ScalarValue::of_int(Ring::IntMinPlus, w);
    m.set(r, c, sr_add(m.at(r, c), v));  // min keeps the lightest duplicate
  };
  for (const auto& e : g.edges) {
    check_endpoint(g, e.from);
    check_endpoint(g, e.to);
    if (e.weight < 0)
      throw std::invalid_argument("negative edge weight");
    relax(e.from - 1, e.to - 1, e.weight);
    if (!g.directed) relax(e.to - 1, e.from - 1, e.weight);
  }
  return m;
}

Matrix bool_source(std::size_t n, std::size_t s) {
  if (s < 1 || s > n) throw std::invalid_argument("source outside 1..n");
  Matrix m(n, 1, Ring::Bool);
  m.set(s - 1, 0, ScalarValue::of_bool(true));
  return m;
}

Matrix min_plus_source(std::size_t n, std::size_t s) {
  if (s < 1 || s > n) throw std::invalid_argument("source outside 1..n");
  Matrix m(n, 1, Ring::IntMinPlus);
  m.set(s - 1, 0, ScalarValue::of_int(Ring::IntMinPlus, 0));
  return m;
}

GraphSpec graph_from_matrix(const Matrix& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("adjacency matrix must be square");
  if (m.ring() != Ring::Bool && m.ring() != Ring::IntMinPlus)
    throw std::invalid_argument("adjacency matrix must be bool or int_min_plus");
  GraphSpec g;
  g.n = m.rows();
  ScalarValue z = zero(m.ring());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const ScalarValue& v = m.at(r, c);
      if (v == z) continue;
      std::int64_t w = m.ring() == Ring::Bool ? 1 : v.int_value();
      g.edges.push_back({r + 1, c + 1, w});
    }
  return g;
}

std::vector<std::size_t> oracle_wcc(const GraphSpec& g) {
  std::vector<std::size_t> parent(g.n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& e : g.edges) {
    check_endpoint(g, e.from);
    check_endpoint(g, e.to);
    std::size_t a = find(e.from - 1), b = find(e.to - 1);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> label(g.n);
  for (std::size_t v = 0; v < g.n; ++v) label[v] = find(v) + 1;
  return label;
}

std::vector<bool> oracle_reach(const GraphSpec& g, std::size_t s) {
  check_endpoint(g, s);
  std::vector<std::vector<std::size_t>> out(g.n);
  for (const auto& e : g.edges) {
    check_endpoint(g, e.from);
    check_endpoint(g, e.to);
    out[e.from - 1].push_back(e.to - 1);
    if (!g.directed) out[e.to - 1].push_back(e.from - 1);
  }
  std::vector<bool> seen(g.n, false);
  std::deque<std::size_t> queue{s - 1};
  seen[s - 1] = true;
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t w : out[v])
      if (!seen[w]) {
        seen[w] = true;
        queue.push_back(w);
      }
  }
  return seen;
}

std::vector<std::optional<std::int64_t>> oracle_sssp(const GraphSpec& g,
                                                     std::size_t s) {
  check_endpoint(g, s);
  std::vector<std::optional<std::int64_t>> dist(g.n);
  dist[s - 1] = 0;
  for (std::size_t round = 1; round < g.n; ++round) {
    bool moved = false;
    for (const auto& e : g.edges) {
      check_endpoint(g, e.from);
      check_endpoint(g, e.to);
      if (e.weight < 0) throw std::invalid_argument("negative edge weight");
      auto relax = [&](std::size_t u, std::size_t v) {
        if (!dist[u]) return;
        std::int64_t d = *dist[u] + e.weight;
        if (!dist[v] || d < *dist[v]) {
          dist[v] = d;
          moved = true;
        }
      };
      relax(e.from - 1, e.to - 1);
      if (!g.directed) relax(e.to - 1, e.from - 1);
    }
    if (!moved) break;
  }
  return dist;
}

std::vector<std::size_t> wcc_labels(const Matrix& x) {
  if (x.ring() != Ring::Bool)
    throw std::invalid_argument("labels come from a bool matrix");
  std::vector<std::size_t> out(x.rows(), 0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c)
      if (x.at(r, c).bool_value()) {
        if (out[r])
          throw std::invalid_argument("row " + std::to_string(r + 1) +
                                      " has more than one label");
        out[r] = c + 1;
      }
    if (!out[r])
      throw std::invalid_argument("row " + std::to_string(r + 1) +
                                  " has no label");
  }
  return out;
}

GraphSpec random_graph(std::mt19937_64& rng, std::size_t n, double density,
                       bool directed) {
  GraphSpec g{n, {}, directed};
  std::bernoulli_distribution flip(density);
  for (std::size_t u = 1; u <= n; ++u)
    for (std::size_t v = directed ? 1 : u + 1; v <= n; ++v) {
      if (u == v) continue;
      if (flip(rng)) g.edges.push_back({u, v, 1});
    }
  return g;
}

GraphSpec random_weighted_graph(std::mt19937_64& rng, std::size_t n,
                                double density, std::int64_t weight_max) {
  GraphSpec g = random_graph(rng, n, density, true);
  std::uniform_int_distribution<std::int64_t> w(0, weight_max);
  for (auto& e : g.edges) e.weight = w(rng);
  return g;
}

}  // namespace matlang
