#include <random>
#include <vector>

#include "doctest.h"
#include "matlang/eval.hpp"
#include "matlang/fuzz.hpp"
#include "matlang/ir.hpp"
#include "matlang/rewrite.hpp"
#include "mk.hpp"
#include "naive_eval.hpp"

using namespace matlang;
using namespace matlang::testing;

namespace {

SizeTerm N = SizeTerm::sym("n");

Schema one_matrix(const char* name, Ring r) {
  Schema s;
  s.emplace(name, MatrixType{N, N, r});
  return s;
}

Instance bind(const char* name, Matrix m) {
  Instance inst;
  inst.mats.emplace(name, std::move(m));
  return inst;
}

// eval_program with sizes unified from the bound matrices first.
Matrix evalp(const Schema& s, const Instance& inst, const Expr& e) {
  return eval_program(s, sized(s, inst), e);
}
Matrix evalp(const Schema& s, const Instance& inst, const Expr& e,
             const EvalOptions& opts) {
  return eval_program(s, sized(s, inst), e, opts);
}

}  // namespace

TEST_CASE("structural operators on concrete values") {
  Matrix a = mk_int(Ring::Int, {{1, 2}, {3, 4}});
  Instance inst = bind("A", a);
  Schema s = one_matrix("A", Ring::Int);
  CHECK(matrix_equal(evalp(s, inst, transpose(var("A"))),
                     mk_int(Ring::Int, {{1, 3}, {2, 4}})));
  CHECK(matrix_equal(evalp(s, inst, ones(var("A"))),
                     mk_int(Ring::Int, {{1}, {1}})));
  CHECK(matrix_equal(evalp(s, inst, matmul(var("A"), var("A"))),
                     mk_int(Ring::Int, {{7, 10}, {15, 22}})));
  Schema sv;
  sv.emplace("V", MatrixType{N, SizeTerm::one(), Ring::Int});
  CHECK(matrix_equal(evalp(sv, bind("V", mk_int(Ring::Int, {{5}, {6}})),
                                  diag(var("V"))),
                     mk_int(Ring::Int, {{5, 0}, {0, 6}})));
}

TEST_CASE("matrix product over min-plus computes lightest connections") {
  Ring r = Ring::IntMinPlus;
  Matrix a(2, 2, r);
  a.set(0, 1, ScalarValue::of_int(r, 2));
  a.set(1, 0, ScalarValue::of_int(r, 3));
  a.set(1, 1, ScalarValue::of_int(r, 1));
  Matrix v(2, 1, r);
  v.set(0, 0, ScalarValue::of_int(r, 0));
  Schema s = one_matrix("A", r);
  s.emplace("V", MatrixType{N, SizeTerm::one(), r});
  Instance inst = bind("A", a);
  inst.mats.emplace("V", v);
  Matrix got = evalp(s, inst, matmul(var("A"), var("V")));
  // row 0: min(a00 + 0, a01 + inf) = inf + 0 -> inf? no: a00 omitted = inf,
  // so row 0 = a01 + v1 = 2 + inf = inf; row 1 = a10 + v0 = 3
  CHECK(got.at(0, 0) == ScalarValue::pos_inf(r));
  CHECK(got.at(1, 0) == ScalarValue::of_int(r, 3));
}

TEST_CASE("pickany keeps the first nonzero of each row only") {
  Matrix m = mk_int(Ring::Int, {{0, 5, 7}, {0, 0, 0}, {3, 0, 2}});
  CHECK(matrix_equal(pick_any(m),
                     mk_int(Ring::Int, {{0, 5, 0}, {0, 0, 0}, {3, 0, 0}})));
  // over min-plus, "nonzero" means "not +inf": a finite 0 weight is kept
  Ring r = Ring::IntMinPlus;
  Matrix t(1, 3, r);
  t.set(0, 1, ScalarValue::of_int(r, 0));
  t.set(0, 2, ScalarValue::of_int(r, 4));
  Matrix p = pick_any(t);
  CHECK(p.at(0, 0) == ScalarValue::pos_inf(r));
  CHECK(p.at(0, 1) == ScalarValue::of_int(r, 0));
  CHECK(p.at(0, 2) == ScalarValue::pos_inf(r));
}

TEST_CASE("canonical basis vectors are one-hot and 1-based") {
  Matrix e2 = canonical_vector(3, 2, Ring::Int);
  CHECK(matrix_equal(e2, mk_int(Ring::Int, {{0}, {1}, {0}})));
  CHECK_THROWS_AS(canonical_vector(3, 0, Ring::Int), EvalError);
  CHECK_THROWS_AS(canonical_vector(3, 4, Ring::Int), EvalError);
}

TEST_CASE("loop bodies read the previous iteration's bindings simultaneously") {
  // S := S + X; X := A * X  --- S must accumulate the OLD X each round
  Schema s = one_matrix("A", Ring::Int);
  s.emplace("B", MatrixType{N, SizeTerm::one(), Ring::Int});
  Instance inst = bind("A", mk_int(Ring::Int, {{2, 0}, {0, 2}}));
  inst.mats.emplace("B", mk_int(Ring::Int, {{1}, {1}}));
  Expr loop = for_counted(
      var("B"),
      {{"S", apply(make_add_fn(Ring::Int), {var("S"), var("X")})},
       {"X", matmul(var("A"), var("X"))}},
      {var("B"), var("B")});
  Matrix got = evalp(s, inst, loop);
  // 2 iterations: S = B + B + 2B = 4B would be wrong; correct is B+B, then +2B
  CHECK(matrix_equal(got, mk_int(Ring::Int, {{4}, {4}})));
  // order of bindings must not matter for the values, only for the result pick
  Expr swapped = for_counted(
      var("B"),
      {{"X", matmul(var("A"), var("X"))},
       {"S", apply(make_add_fn(Ring::Int), {var("S"), var("X")})}},
      {var("B"), var("B")});
  CHECK(matrix_equal(evalp(s, inst, swapped),
                     mk_int(Ring::Int, {{4}, {4}})));
}

TEST_CASE("counted loop iterates exactly driver-rows times, driver read once") {
  Schema s = one_matrix("A", Ring::Int);
  Instance inst = bind("A", mk_int(Ring::Int, {{1, 1, 1}, {0, 1, 1}, {0, 0, 1}}));
  // driver ones(A) is 3 x 1: three doublings of the 1 x 1 seed
  Expr seed = matmul(transpose(ones(var("A"))), ones(var("A")));  // [[3]]
  PointwiseFn dbl{{{"a", Ring::Int}},
                  sc_add(sc_param("a"), sc_param("a"))};
  Expr loop = for_counted(ones(var("A")), {{"X", apply(dbl, {var("X")})}}, {seed});
  CHECK(matrix_equal(evalp(s, inst, loop), mk_int(Ring::Int, {{24}})));
}

TEST_CASE("canonical loop visits e_1 .. e_n in order") {
  // X := X + diag(v): after the loop X has collected every basis direction
  Schema s;
  s.emplace("B", MatrixType{N, SizeTerm::one(), Ring::Int});
  Instance inst = bind("B", mk_int(Ring::Int, {{7}, {7}, {7}}));
  Expr body = apply(make_add_fn(Ring::Int),
                    {var("X"), matmul(diag(var("v")), var("B"))});
  Expr loop = for_canonical("v", {{"X", body}}, {var("B")});
  Expr seeded = let_in("v", var("B"), loop);
  CHECK(matrix_equal(evalp(s, inst, seeded),
                     mk_int(Ring::Int, {{14}, {14}, {14}})));

  // hooks observe the iteration count and the snapshot-before-body rule
  std::vector<std::size_t> iters;
  std::vector<std::string> evals;
  EvalHooks hooks;
  hooks.on_loop_iter = [&](std::size_t i, const auto& binds) {
    iters.push_back(i);
    REQUIRE(binds.size() == 1);
    CHECK(binds[0].first == "X");
  };
  hooks.on_body_eval = [&](const std::string& b) { evals.push_back(b); };
  EvalOptions opts;
  opts.hooks = &hooks;
  evalp(s, inst, seeded, opts);
  CHECK(iters == std::vector<std::size_t>{1, 2, 3});
  CHECK(evals == std::vector<std::string>{"X", "X", "X"});
}

TEST_CASE("loop hook snapshots show the values each iteration observes") {
  Schema s;
  s.emplace("B", MatrixType{N, SizeTerm::one(), Ring::Int});
  Instance inst = bind("B", mk_int(Ring::Int, {{1}, {1}}));
  PointwiseFn dbl{{{"a", Ring::Int}}, sc_add(sc_param("a"), sc_param("a"))};
  Expr loop = for_counted(var("B"), {{"X", apply(dbl, {var("X")})}}, {var("B")});
  std::vector<std::int64_t> first_entries;
  EvalHooks hooks;
  hooks.on_loop_iter = [&](std::size_t, const auto& binds) {
    first_entries.push_back(binds[0].second->at(0, 0).int_value());
  };
  EvalOptions opts;
  opts.hooks = &hooks;
  evalp(s, inst, loop, opts);
  // iteration 1 observes the init, iteration 2 the once-doubled value
  CHECK(first_entries == std::vector<std::int64_t>{1, 2});
}

TEST_CASE("results and intermediates respect the element limit") {
  Schema s;
  s.emplace("V", MatrixType{N, SizeTerm::one(), Ring::Int});
  Instance inst = bind("V", mk_int(Ring::Int, {{1}, {2}, {3}, {4}}));
  // V * V' is 4 x 4 = 16 cells; a limit of 15 must refuse, 16 must pass
  Expr outer = matmul(var("V"), transpose(var("V")));
  EvalOptions tight;
  tight.element_limit = 15;
  CHECK_THROWS_AS(evalp(s, inst, outer, tight), EvalError);
  EvalOptions exact;
  exact.element_limit = 16;
  CHECK_NOTHROW(evalp(s, inst, outer, exact));
  try {
    evalp(s, inst, outer, tight);
  } catch (const EvalError& e) {
    CHECK(e.kind() == EvalErrorKind::Resource);
  }
}

TEST_CASE("evaluation type-checks first and verifies the instance") {
  Schema s = one_matrix("A", Ring::Int);
  CHECK_THROWS_AS(evalp(s, bind("A", mk_int(Ring::Int, {{1, 2}, {3, 4}})),
                               matmul(var("A"), transpose(ones(var("A"))))),
                  TypeCheckError);
  // wrong ring in the instance
  CHECK_THROWS_AS(evalp(s, bind("A", mk_bool({{1, 0}, {0, 1}})), var("A")),
                  EvalError);
  // non-square value for an n x n schema entry
  CHECK_THROWS_AS(evalp(s, bind("A", mk_int(Ring::Int, {{1, 2, 3}, {4, 5, 6}})),
                               var("A")),
                  EvalError);
}

TEST_CASE("arithmetic faults surface as arith eval errors") {
  Schema s;
  s.emplace("V", MatrixType{N, SizeTerm::one(), Ring::Int});
  Instance inst = bind("V", mk_int(Ring::Int, {{1}, {1}}));
  PointwiseFn blow{{{"a", Ring::Int}},
                   sc_mul(sc_lit(ScalarValue::of_int(Ring::Int, 1'000'000'000'000)),
                          sc_mul(sc_lit(ScalarValue::of_int(Ring::Int, 1'000'000'000'000)),
                                 sc_param("a")))};
  try {
    evalp(s, inst, apply(blow, {var("V")}));
    FAIL("expected an eval error");
  } catch (const EvalError& e) {
    CHECK(e.kind() == EvalErrorKind::Arith);
  }
}

TEST_CASE("matrix encoding is entry-wise and decodes back exactly") {
  Ring r = Ring::IntMinPlus;
  Matrix m(2, 2, r);
  m.set(0, 0, ScalarValue::of_int(r, 0));
  m.set(0, 1, ScalarValue::of_int(r, 5));
  // (1,0) and (1,1) stay +inf, the min-plus zero
  Matrix w = encode_matrix(m);
  CHECK(w.ring() == Ring::Real);
  CHECK(w.at(0, 0) == ScalarValue::pos_inf(Ring::Real));
  CHECK(w.at(0, 1) == ScalarValue::of_real(Ring::Real, 5.0));
  CHECK(w.at(1, 0) == ScalarValue::of_real(Ring::Real, 0.0));
  CHECK(matrix_equal(decode_matrix(r, w), m));
}

TEST_CASE("library evaluator agrees with a naive reference on random programs") {
  std::mt19937_64 rng(2026);
  const Dialect targets[] = {Dialect::ML, Dialect::FOR_ML, Dialect::SIFOR_ML,
                             Dialect::DEC_ML, Dialect::CORE};
  int compared = 0;
  for (int i = 0; i < 300; ++i) {
    GenProgram gp = gen_program(rng, targets[i % 5], 4);
    Matrix direct(1, 1, Ring::Bool);
    try {
      direct = evalp(gp.schema, gp.inst, gp.expr);
    } catch (const EvalError& e) {
      if (e.kind() == EvalErrorKind::Arith) continue;  // overflow: skip
      throw;
    }
    Matrix ref = naive_eval_program(gp.schema, gp.inst, gp.expr);
    INFO("case ", i);
    CHECK(matrix_mismatch(direct, ref, 1e-9).empty());
    ++compared;
  }
  CHECK(compared > 250);
}
