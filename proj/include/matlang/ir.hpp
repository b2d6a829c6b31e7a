#pragma once

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "matlang/semiring.hpp"

namespace matlang {

// A matrix dimension: either the literal 1 or a named size symbol.
class SizeTerm {
 public:
  SizeTerm() = default;  // 1
  static SizeTerm one() { return SizeTerm(); }
  static SizeTerm sym(std::string name);

  bool is_one() const { return name_.empty(); }
  const std::string& name() const { return name_; }
  std::string str() const { return is_one() ? "1" : name_; }

  friend bool operator==(const SizeTerm&, const SizeTerm&) = default;
  friend auto operator<=>(const SizeTerm&, const SizeTerm&) = default;

 private:
  std::string name_;
};

struct MatrixType {
  SizeTerm rows;
  SizeTerm cols;
  Ring ring = Ring::Bool;

  friend bool operator==(const MatrixType&, const MatrixType&) = default;
  std::string str() const;  // e.g. "a x 1 over int"
};

using Schema = std::map<std::string, MatrixType>;

// The language family, ordered smallest-first for reporting. A program's
// dialect is the first of these its constructs and ring usage fit into.
enum class Dialect { ML, FOR_ML, SIFOR_ML, CORE, DEC_ML, MUSE_ML };

inline constexpr Dialect kDialects[] = {
    Dialect::ML,   Dialect::FOR_ML, Dialect::SIFOR_ML,
    Dialect::CORE, Dialect::DEC_ML, Dialect::MUSE_ML,
};

std::string_view dialect_name(Dialect d);  // ml, for, sifor, core, dec, muse
std::optional<Dialect> dialect_from_name(std::string_view name);

// ---- scalar expressions (bodies of pointwise functions) ----

enum class ScalarOp { Param, Lit, Add, Mul, Sub, Div, Eq, Cast, Cond, Enc, Dec };

struct ScalarNode;
using ScalarPtr = std::shared_ptr<const ScalarNode>;

struct ScalarNode {
  ScalarOp op;
  std::string param;               // Param
  std::optional<ScalarValue> lit;  // Lit
  Ring ring = Ring::Bool;          // Cast target; Enc/Dec subject ring
  std::vector<ScalarPtr> args;
};

ScalarPtr sc_param(std::string name);
ScalarPtr sc_lit(ScalarValue v);
ScalarPtr sc_add(ScalarPtr a, ScalarPtr b);
ScalarPtr sc_mul(ScalarPtr a, ScalarPtr b);
ScalarPtr sc_sub(ScalarPtr a, ScalarPtr b);
ScalarPtr sc_div(ScalarPtr a, ScalarPtr b);
ScalarPtr sc_eq(ScalarPtr a, ScalarPtr b);
ScalarPtr sc_cast(Ring target, ScalarPtr a);
ScalarPtr sc_cond(ScalarPtr w, ScalarPtr x, ScalarPtr y, ScalarPtr z);
ScalarPtr sc_enc(Ring r, ScalarPtr a);
ScalarPtr sc_dec(Ring r, ScalarPtr a);

struct PointwiseFn {
  std::vector<std::pair<std::string, Ring>> params;  // nonempty, distinct names
  ScalarPtr body;
};

// Checks the parameter-list invariants and that every Param in the body is
// declared.
PointwiseFn make_fn(std::vector<std::pair<std::string, Ring>> params,
                    ScalarPtr body);

bool scalar_equal(const ScalarPtr& a, const ScalarPtr& b);
bool fn_equal(const PointwiseFn& a, const PointwiseFn& b);

// ---- matrix expressions ----

enum class ExprOp {
  Var,
  Transpose,
  Ones,
  Diag,
  MatMul,
  Apply,
  PickAny,
  Let,
  ForCanonical,
  ForCounted,
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct Binding {
  std::string name;
  Expr body;
};

// One node type serves the whole family; per-dialect legality is a separate
// validation pass. Children layout:
//   Transpose/Ones/Diag/PickAny  args = {input}
//   MatMul                       args = {lhs, rhs}
//   Apply                        args = fn arguments (>= 1)
//   Let                          name = bound var, args = {bound, body}
//   ForCanonical                 name = canonical vector, args = inits
//   ForCounted                   args = {driver, inits...}
// Both loop forms keep one init per binding, in binding order; the loop
// result is the first binding's final value.
//
// Rewrites may share subtrees, but only within a single binding scope:
// annotation maps (types, loop info) are keyed by node identity.
struct ExprNode {
  ExprOp op;
  std::string name;
  std::optional<PointwiseFn> fn;
  std::vector<Binding> bindings;
  std::vector<Expr> args;

  const Expr& driver() const;               // ForCounted only
  std::size_t init_count() const;           // loops: == bindings.size()
  const Expr& init(std::size_t i) const;    // loops
};

Expr var(std::string name);
Expr transpose(Expr e);
Expr ones(Expr e);
Expr diag(Expr e);
Expr matmul(Expr a, Expr b);
Expr apply(PointwiseFn fn, std::vector<Expr> args);
Expr pickany(Expr e);
Expr let_in(std::string name, Expr bound, Expr body);
Expr for_canonical(std::string v, std::vector<Binding> bindings,
                   std::vector<Expr> inits);
Expr for_counted(Expr driver, std::vector<Binding> bindings,
                 std::vector<Expr> inits);

bool expr_equal(const Expr& a, const Expr& b);

// Free matrix variables of e (let bodies and loop bodies see their binders).
std::set<std::string> free_vars(const Expr& e);

// Every matrix-level name that occurs anywhere in e: variables, let binders,
// loop binding names and canonical-vector names. Scalar parameter names live
// in a separate namespace and are not included.
std::set<std::string> all_names(const Expr& e);

// hint if unused, otherwise hint_1, hint_2, ... (smallest free suffix).
std::string fresh_name(const std::set<std::string>& avoid,
                       const std::string& hint);

struct Violation {
  std::string rule;  // e.g. "pickAny not in sifor"
  std::string path;  // node path from the root, e.g. "let.body.arg0"
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;
  std::string str() const;
};

// Checks construct legality and the ring discipline of e against dialect d.
// The schema contributes its rings to the single-ring check of the
// pre-multi-ring dialects.
ValidationReport validate_dialect(const Expr& e, Dialect d, const Schema& s);

// First dialect (in kDialects order) that validates, if any.
std::optional<Dialect> smallest_dialect(const Expr& e, const Schema& s);

}  // namespace matlang
