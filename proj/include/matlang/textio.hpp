// Concrete syntax: program files (schema declarations plus one expression)
// and sparse matrix files. Parsing and printing round-trip: parse(print(x))
// is IR-equal for programs and value-equal for matrices.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "matlang/eval.hpp"
#include "matlang/ir.hpp"
#include "matlang/semiring.hpp"

namespace matlang {

struct ParseError : std::runtime_error {
  int line;
  int col;
  ParseError(const std::string& what, int line_, int col_)
      : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                           std::to_string(col_) + ": " + what),
        line(line_),
        col(col_) {}
};

struct ParsedProgram {
  Schema schema;
  Expr expr;
  Dialect dialect;  // smallest dialect containing the program
};

// Program grammar:
//   program  := decl* "in" expr
//   decl     := "matrix" NAME ":" size "x" size "over" RING ";"
//   size     := NAME | "1"
//   expr     := mul (("+"|"-") mul)*          sugar for apply of the ring
//   mul      := post ("*" post)*              operations, resolved after
//   post     := prim ("'")*                   parsing from the left operand
//   prim     := "(" expr ")" | NAME | "ones(" expr ")" | "diag(" expr ")"
//             | "pickany(" expr ")" | "apply[" fn "](" expr ("," expr)* ")"
//             | "let" NAME "=" expr "in" expr
//             | "for" ("[" NAME "]")? "{" NAME ":=" expr (";" NAME ":=" expr)* "}"
//               "(" expr ("," expr)* ")"
//   fn       := "(" NAME ":" RING ("," NAME ":" RING)* ")" "->" sexpr
//   sexpr    := infix +,-,*,/,== over: NAME | RING "(" token ")"
//             | "cast(" RING "," sexpr ")" | "cond(" 4 sexprs ")"
//             | "enc(" RING "," sexpr ")" | "dec(" RING "," sexpr ")"
// Counted loops list the driver as the first parenthesized argument; a
// bracketed name makes the loop canonical. "%" starts a comment to end of
// line. Throws ParseError, including when the program fits no dialect.
ParsedProgram parse_program(std::string_view text);

std::string print_program(const Schema& schema, const Expr& e);
std::string print_expr(const Expr& e);

// Matrix files: header "matrix ROWS COLS ring", then one "row col value"
// line per stored entry, 1-based indices, omitted entries hold the ring's
// additive identity. "%" comments and blank lines allowed. The data
// carrier is strict: int and real entries must be finite; min-plus admits
// "inf" and max-plus "-inf" only.
Matrix parse_matrix(std::string_view text);
std::string print_matrix(const Matrix& m);

// Shared value-token reader: true|false, signed integers, decimal reals
// (with optional exponent), inf, -inf. Program-literal semantics: real
// literals may be infinite. Throws std::invalid_argument on bad tokens.
ScalarValue parse_value_token(Ring r, std::string_view token);

}  // namespace matlang
