#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "matlang/eval.hpp"
#include "matlang/fuzz.hpp"
#include "matlang/ir.hpp"
#include "matlang/rewrite.hpp"
#include "matlang/textio.hpp"
#include "mk.hpp"

using namespace matlang;
using namespace matlang::testing;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "parse error at L:C: ..." carries a position; grab it for assertions.
std::pair<int, int> error_pos(const std::string& text) {
  try {
    parse_program(text);
  } catch (const ParseError& e) {
    return {e.line, e.col};
  }
  FAIL("expected a parse error");
  return {0, 0};
}

}  // namespace

TEST_CASE("programs print and reparse to the identical tree") {
  const char* sources[] = {
      "matrix A : n x n over bool;\nin A * A'",
      "matrix A : n x m over int;\nin let X = A' in ones(X)",
      "matrix V : n x 1 over real;\nin diag(V) * V",
      "matrix A : a x a over bool;\nin for { X := pickany(X + A * X) } (ones(A), diag(ones(A)))",
      "matrix B : n x 1 over int_min_plus;\nin for [v] { X := X + v } (B)",
      "matrix V : n x 1 over int;\nin apply[(c: int) -> cast(real, c)](V)",
      "matrix V : n x 1 over real;\nin apply[(a: real, b: real) -> "
      "cond(a == b, real(1), a / b, a - b)](V, V)",
  };
  for (const char* src : sources) {
    CAPTURE(src);
    ParsedProgram p = parse_program(src);
    std::string printed = print_program(p.schema, p.expr);
    ParsedProgram q = parse_program(printed);
    CHECK(expr_equal(p.expr, q.expr));
    CHECK(p.schema == q.schema);
    CHECK(p.dialect == q.dialect);
    // printing is a fixpoint after one round
    CHECK(print_program(q.schema, q.expr) == printed);
  }
}

TEST_CASE("random well-typed programs survive the print/parse round-trip") {
  std::mt19937_64 rng(777);
  const Dialect targets[] = {Dialect::ML, Dialect::FOR_ML, Dialect::SIFOR_ML,
                             Dialect::DEC_ML, Dialect::CORE};
  for (int i = 0; i < 400; ++i) {
    GenProgram gp = gen_program(rng, targets[i % 5], 4);
    std::string printed = print_program(gp.schema, gp.expr);
    CAPTURE(printed);
    ParsedProgram p = parse_program(printed);
    CHECK(expr_equal(p.expr, gp.expr));
    CHECK(p.schema == gp.schema);
  }
}

TEST_CASE("operator sugar resolves to ring functions of the left operand") {
  ParsedProgram p = parse_program(
      "matrix A : n x n over int_max_plus;\nin A + A");
  REQUIRE(p.expr->op == ExprOp::Apply);
  CHECK(is_add_fn(*p.expr->fn));
  CHECK(p.expr->fn->params[0].second == Ring::IntMaxPlus);
  ParsedProgram q = parse_program(
      "matrix A : n x n over real;\nin A - A");
  REQUIRE(q.expr->op == ExprOp::Apply);
  CHECK(is_sub_fn(*q.expr->fn));
  CHECK(q.expr->fn->params[0].second == Ring::Real);
  // sugar binds looser than *, and * chains left
  ParsedProgram r = parse_program(
      "matrix A : n x n over int;\nin A + A * A * A");
  REQUIRE(r.expr->op == ExprOp::Apply);
  CHECK(r.expr->args[1]->op == ExprOp::MatMul);
  CHECK(r.expr->args[1]->args[0]->op == ExprOp::MatMul);
}

TEST_CASE("sugar inside loop bodies sees binding and vector rings") {
  ParsedProgram p = parse_program(
      "matrix B : n x 1 over real_min_plus;\n"
      "in for [v] { X := X + v } (B)");
  const ExprNode* loop = p.expr.get();
  REQUIRE(loop->op == ExprOp::ForCanonical);
  const ExprNode* body = loop->bindings[0].body.get();
  REQUIRE(body->op == ExprOp::Apply);
  CHECK(body->fn->params[0].second == Ring::RealMinPlus);
}

TEST_CASE("parse errors carry usable line and column positions") {
  CHECK(error_pos("matrix A : n x n over bool\nin A") == std::pair{2, 1});
  CHECK(error_pos("matrix A : n x n over blue;\nin A") == std::pair{1, 23});
  CHECK(error_pos("matrix A : 3 x n over bool;\nin A") == std::pair{1, 12});
  CHECK(error_pos("matrix for : n x n over bool;\nin for") == std::pair{1, 8});
  CHECK(error_pos("matrix A : n x n over bool;\nin A $ A") == std::pair{2, 6});
  // duplicates are reported at the start of the repeated declaration
  CHECK(error_pos("matrix A : n x n over bool;\nmatrix A : n x n over bool;\nin A") ==
        std::pair{2, 1});
  // a structurally fine program that fits no dialect reports at 1:1 with
  // the reasons each side rejects it
  try {
    parse_program("matrix A : n x n over bool;\nin for [v] { X := pickany(X) } (A * A)");
    FAIL("expected no-dialect rejection");
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
    CHECK(std::string(e.what()).find("fits no dialect") != std::string::npos);
  }
}

TEST_CASE("scalar literal tokens cover the carrier, not more") {
  CHECK(parse_value_token(Ring::Int, "-17") == ScalarValue::of_int(Ring::Int, -17));
  CHECK(parse_value_token(Ring::Bool, "true") == ScalarValue::of_bool(true));
  CHECK(parse_value_token(Ring::Real, "2.5e-1") == ScalarValue::of_real(Ring::Real, 0.25));
  CHECK(parse_value_token(Ring::IntMinPlus, "inf") ==
        ScalarValue::pos_inf(Ring::IntMinPlus));
  CHECK(parse_value_token(Ring::Real, "-inf") == ScalarValue::neg_inf(Ring::Real));
  CHECK_THROWS(parse_value_token(Ring::Int, "inf"));
  CHECK_THROWS(parse_value_token(Ring::IntMinPlus, "-inf"));
  CHECK_THROWS(parse_value_token(Ring::Int, "99999999999999999999"));
  CHECK_THROWS(parse_value_token(Ring::Bool, "2"));
  // program-level real literals admit the sentinels
  ParsedProgram p = parse_program(
      "matrix V : n x 1 over real;\nin apply[(c: real) -> real(inf)](V)");
  CHECK(p.expr->fn->body->lit == ScalarValue::pos_inf(Ring::Real));
}

TEST_CASE("matrix files round-trip sparsely with omitted zeros") {
  Matrix m = mk_int(Ring::Int, {{0, 5}, {-2, 0}});
  std::string text = print_matrix(m);
  CHECK(text == "matrix 2 2 int\n1 2 5\n2 1 -2\n");
  CHECK(matrix_equal(parse_matrix(text), m));
  // tropical zeros are the omitted infinities
  Ring r = Ring::IntMinPlus;
  Matrix t(2, 2, r);
  t.set(0, 1, ScalarValue::of_int(r, 3));
  std::string tt = print_matrix(t);
  CHECK(tt == "matrix 2 2 int_min_plus\n1 2 3\n");
  CHECK(matrix_equal(parse_matrix(tt), t));
  // explicit inf in a tropical file is legal, if redundant
  CHECK(matrix_equal(parse_matrix("matrix 2 2 int_min_plus\n1 2 3\n2 1 inf\n"), t));
  // comments and blank lines are fine anywhere
  CHECK(matrix_equal(
      parse_matrix("% adjacency\nmatrix 2 2 int\n\n1 2 5\n% done\n2 1 -2\n"),
      mk_int(Ring::Int, {{0, 5}, {-2, 0}})));
}

TEST_CASE("matrix files reject malformed or out-of-carrier content") {
  CHECK_THROWS_AS(parse_matrix("matrix 2 2 blue\n"), ParseError);
  CHECK_THROWS_AS(parse_matrix("matrix 0 2 int\n"), ParseError);
  CHECK_THROWS_AS(parse_matrix("matrix 2 int\n"), ParseError);
  CHECK_THROWS_AS(parse_matrix("matrix 2 2 int\n3 1 5\n"), ParseError);
  CHECK_THROWS_AS(parse_matrix("matrix 2 2 int\n1 2 5\n1 2 6\n"), ParseError);
  CHECK_THROWS_AS(parse_matrix("matrix 2 2 int\n1 2\n"), ParseError);
  CHECK_THROWS_AS(parse_matrix("matrix 2 2 bool\n1 1 maybe\n"), ParseError);
  // plain real files must stay finite; the sentinels are not file values
  CHECK_THROWS_AS(parse_matrix("matrix 2 2 real\n1 1 inf\n"), ParseError);
  // the element limit applies to declared shapes
  CHECK_THROWS_AS(parse_matrix("matrix 100000 100000 int\n"), ParseError);
}

TEST_CASE("random matrices round-trip through their file form") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> dim(1, 7), val(-4, 4), pick(0, 2);
  const Ring rings[] = {Ring::Bool, Ring::Int, Ring::Real, Ring::IntMinPlus,
                        Ring::RealMaxPlus};
  for (int k = 0; k < 100; ++k) {
    Ring r = rings[k % 5];
    Matrix m(dim(rng), dim(rng), r);
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) {
        if (pick(rng) != 0) continue;
        int v = val(rng);
        if (r == Ring::Bool)
          m.set(i, j, ScalarValue::of_bool(true));
        else if (is_int_domain(r))
          m.set(i, j, ScalarValue::of_int(r, v));
        else
          m.set(i, j, ScalarValue::of_real(r, v * 0.5));
      }
    CHECK(matrix_equal(parse_matrix(print_matrix(m)), m));
  }
}

TEST_CASE("shipped example programs parse to their advertised dialect") {
  namespace fs = std::filesystem;
  fs::path dir = fs::path(MATLANG_SOURCE_DIR) / "programs";
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".ml") continue;
    ++seen;
    std::string text = slurp(entry.path());
    CAPTURE(entry.path().filename().string());
    // first line is "% dialect: <name>"
    REQUIRE(text.rfind("% dialect: ", 0) == 0);
    std::string claimed = text.substr(11, text.find('\n') - 11);
    ParsedProgram p = parse_program(text);
    CHECK(dialect_name(p.dialect) == claimed);
    // and the printer/parser agree on the tree
    ParsedProgram q = parse_program(print_program(p.schema, p.expr));
    CHECK(expr_equal(p.expr, q.expr));
  }
  CHECK(seen == 9);
}

TEST_CASE("printing is deterministic and self-delimiting") {
  ParsedProgram p = parse_program(
      "matrix A : n x n over int;\nin (A + A) * A - A * A");
  std::string once = print_program(p.schema, p.expr);
  CHECK(once == print_program(p.schema, p.expr));
  // the sugar printfs keep their parentheses so precedence cannot drift
  CHECK(once.find("((A + A) * A)") != std::string::npos);
}
