#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "matlang/ir.hpp"
#include "matlang/typecheck.hpp"

namespace matlang {

// Raised when a pass is handed a program outside its source dialect, or
// when a dialect-sensitive command receives a program fitting no dialect.
class DialectError : public std::runtime_error {
 public:
  explicit DialectError(const std::string& msg) : std::runtime_error(msg) {}
};

struct LoweringReport {
  Dialect source = Dialect::ML;
  Dialect target = Dialect::ML;
  bool changed = false;
  bool encoded = false;  // result computes over the real-valued encoding
  std::vector<std::string> fresh_names;
  std::vector<std::string> macros;  // macro expansions performed
  std::string str() const;
};

struct Lowered {
  Schema schema;
  Expr expr;
  LoweringReport report;
};

// Hands out names that collide neither with each other nor with anything in
// the seed set.
class NameSupply {
 public:
  NameSupply() = default;
  explicit NameSupply(std::set<std::string> used) : used_(std::move(used)) {}
  std::string fresh(const std::string& hint);
  const std::set<std::string>& used() const { return used_; }
  // Every name handed out so far, in issue order.
  const std::vector<std::string>& issued() const { return issued_; }

 private:
  std::set<std::string> used_;
  std::vector<std::string> issued_;
};

// ---- canonical pointwise functions ----

PointwiseFn make_add_fn(Ring r);  // (a, b) -> a + b
PointwiseFn make_mul_fn(Ring r);  // (a, b) -> a * b
// Difference used to knock a selected basis column out of a 0/1 tracking
// vector. Native subtraction over int/real; over the other rings a cond
// cascade realizing 1-1 = 0-0 = 0-1 = 0 and 1-0 = 1 (b = 1 clears the
// entry, any other b keeps a).
PointwiseFn make_sub_fn(Ring r);
PointwiseFn make_const_fn(Ring arg_ring, ScalarValue out);  // (c) -> out
PointwiseFn make_cast_fn(Ring from, Ring to);  // (c) -> cast(to, c)
bool is_add_fn(const PointwiseFn& fn);
bool is_sub_fn(const PointwiseFn& fn);

// ---- building blocks over a machinery ring ----
//
// Each builder takes the expression v_expr whose row count fixes the
// vector length being worked over, and emits loops with freshly named
// binders. They are the vocabulary the multi-ring lowering composes its
// matrix-multiply simulation from, and are usable standalone.

// Zero-filled matrix shaped like shape_expr.
Expr zero_like(const Expr& shape_expr, Ring ring);
// Canonical loop with a single binding initialized to a zero-fill of the
// body's shape (shape_expr provides it).
Expr zero_init_loop(const std::string& v, const std::string& binding,
                    const Expr& body, const Expr& shape_expr, Ring ring);

Expr build_emax(const Expr& v_expr, Ring ring, NameSupply& names);  // last basis vector
Expr build_emin(const Expr& v_expr);                                // first basis vector
Expr build_le_matrix(const Expr& v_expr, Ring ring, NameSupply& names);  // upper triangle incl. diagonal
Expr build_lt_matrix(const Expr& v_expr, Ring ring, NameSupply& names);  // strict upper triangle
Expr build_rotate(const Expr& v_expr, Ring ring, NameSupply& names);     // cyclic shift-up permutation

// Repeated-combine loop: X starts at a zero-fill of v_expr's shape and is
// folded n times through plus_fn(V, rotate*X); the loop's final X holds the
// full fold in every position.
Expr build_sum_loop(const PointwiseFn& zero_fn, const PointwiseFn& plus_fn,
                    const Expr& v_expr, Ring ring, NameSupply& names);
// emax' * sum-loop: the fold as a 1x1 matrix.
Expr build_sum(const PointwiseFn& zero_fn, const PointwiseFn& plus_fn,
               const Expr& v_expr, Ring ring, NameSupply& names);

// Matrix multiply with the combining step spelled out through pointwise
// functions instead of the ring: rows of e1 against columns of e2, cells
// combined by times_fn and folded by plus_fn from zero_const.
Expr build_matmul_sim(const ScalarValue& zero_const, const PointwiseFn& plus_fn,
                      const PointwiseFn& times_fn, const Expr& e1,
                      const Expr& e2, Ring ring, NameSupply& names);

// Nested-loop replacement for pickAny over the machinery ring: scans each
// row left to right, keeping the first nonzero. Exact when row entries
// cannot cancel under the ring's fold (always true for 0/1 masks and
// nonnegative entries).
Expr expand_pick_any(const Expr& input, Ring ring, NameSupply& names);

// ---- whole-program passes ----
//
// Every pass validates its input, returns it unchanged when it already fits
// the target dialect, and validates its output against the target.

Lowered lower_for_to_sifor(const Schema& s, const Expr& e);
Lowered lower_sifor_to_dec(const Schema& s, const Expr& e);
Lowered lower_dec_to_sifor(const Schema& s, const Expr& e);
Lowered lower_muse_to_dec(const Schema& s, const Expr& e);
Lowered simulate_core_in_sifor(const Schema& s, const Expr& e);

// The real-valued embedding by itself: every matrix moves to ring real,
// pointwise bodies are conjugated through enc/dec, and matrix multiplies
// are re-expressed through the simulation macros. The output mixes loop
// forms; feed it through lower_sifor_to_dec (or use lower_muse_to_dec,
// which does) for a dialect-clean program. Decoding the result of the
// output on an encoded instance recovers the original program's result.
Lowered encode_program(const Schema& s, const Expr& e);

// Routes by the program's smallest dialect to reach the requested target
// (dec or sifor).
Lowered lower_to(const Schema& s, const Expr& e, Dialect target);

}  // namespace matlang
