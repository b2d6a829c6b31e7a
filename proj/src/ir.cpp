#include "matlang/ir.hpp"

#include <stdexcept>
#include <utility>

namespace matlang {

namespace {

[[noreturn]] void bad(const std::string& msg) {
  throw std::invalid_argument(msg);
}

std::shared_ptr<ScalarNode> sc_node(ScalarOp op) {
  auto n = std::make_shared<ScalarNode>();
  n->op = op;
  return n;
}

std::shared_ptr<ExprNode> node(ExprOp op) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  return n;
}

void require_distinct_bindings(const std::vector<Binding>& bs) {
  if (bs.empty()) bad("loop needs at least one binding");
  std::set<std::string> seen;
  for (const auto& b : bs) {
    if (b.name.empty()) bad("empty binding name");
    if (!b.body) bad("null binding body");
    if (!seen.insert(b.name).second) bad("duplicate binding name " + b.name);
  }
}

}  // namespace

SizeTerm SizeTerm::sym(std::string name) {
  if (name.empty()) bad("empty size symbol");
  SizeTerm t;
  t.name_ = std::move(name);
  return t;
}

std::string MatrixType::str() const {
  return rows.str() + " x " + cols.str() + " over " +
         std::string(ring_name(ring));
}

std::string_view dialect_name(Dialect d) {
  switch (d) {
    case Dialect::ML: return "ml";
    case Dialect::FOR_ML: return "for";
    case Dialect::SIFOR_ML: return "sifor";
    case Dialect::CORE: return "core";
    case Dialect::DEC_ML: return "dec";
    case Dialect::MUSE_ML: return "muse";
  }
  return "?";
}

std::optional<Dialect> dialect_from_name(std::string_view name) {
  for (Dialect d : kDialects)
    if (dialect_name(d) == name) return d;
  return std::nullopt;
}

ScalarPtr sc_param(std::string name) {
  if (name.empty()) bad("empty parameter name");
  auto n = sc_node(ScalarOp::Param);
  n->param = std::move(name);
  return n;
}

ScalarPtr sc_lit(ScalarValue v) {
  auto n = sc_node(ScalarOp::Lit);
  n->ring = v.ring();
  n->lit = std::move(v);
  return n;
}

namespace {
ScalarPtr sc_binary(ScalarOp op, ScalarPtr a, ScalarPtr b) {
  if (!a || !b) bad("null scalar operand");
  auto n = sc_node(op);
  n->args = {std::move(a), std::move(b)};
  return n;
}
}  // namespace

ScalarPtr sc_add(ScalarPtr a, ScalarPtr b) { return sc_binary(ScalarOp::Add, std::move(a), std::move(b)); }
ScalarPtr sc_mul(ScalarPtr a, ScalarPtr b) { return sc_binary(ScalarOp::Mul, std::move(a), std::move(b)); }
ScalarPtr sc_sub(ScalarPtr a, ScalarPtr b) { return sc_binary(ScalarOp::Sub, std::move(a), std::move(b)); }
ScalarPtr sc_div(ScalarPtr a, ScalarPtr b) { return sc_binary(ScalarOp::Div, std::move(a), std::move(b)); }
ScalarPtr sc_eq(ScalarPtr a, ScalarPtr b) { return sc_binary(ScalarOp::Eq, std::move(a), std::move(b)); }

ScalarPtr sc_cast(Ring target, ScalarPtr a) {
  if (!a) bad("null scalar operand");
  auto n = sc_node(ScalarOp::Cast);
  n->ring = target;
  n->args = {std::move(a)};
  return n;
}

ScalarPtr sc_cond(ScalarPtr w, ScalarPtr x, ScalarPtr y, ScalarPtr z) {
  if (!w || !x || !y || !z) bad("null scalar operand");
  auto n = sc_node(ScalarOp::Cond);
  n->args = {std::move(w), std::move(x), std::move(y), std::move(z)};
  return n;
}

ScalarPtr sc_enc(Ring r, ScalarPtr a) {
  if (!a) bad("null scalar operand");
  auto n = sc_node(ScalarOp::Enc);
  n->ring = r;
  n->args = {std::move(a)};
  return n;
}

ScalarPtr sc_dec(Ring r, ScalarPtr a) {
  if (!a) bad("null scalar operand");
  auto n = sc_node(ScalarOp::Dec);
  n->ring = r;
  n->args = {std::move(a)};
  return n;
}

namespace {

void collect_params(const ScalarPtr& s, std::set<std::string>& out) {
  if (s->op == ScalarOp::Param) out.insert(s->param);
  for (const auto& a : s->args) collect_params(a, out);
}

}  // namespace

PointwiseFn make_fn(std::vector<std::pair<std::string, Ring>> params,
                    ScalarPtr body) {
  if (params.empty()) bad("pointwise function needs at least one parameter");
  if (!body) bad("null pointwise body");
  std::set<std::string> names;
  for (const auto& [n, r] : params) {
    (void)r;
    if (n.empty()) bad("empty parameter name");
    if (!names.insert(n).second) bad("duplicate parameter name " + n);
  }
  std::set<std::string> used;
  collect_params(body, used);
  for (const auto& u : used)
    if (!names.count(u)) bad("body uses undeclared parameter " + u);
  return PointwiseFn{std::move(params), std::move(body)};
}

bool scalar_equal(const ScalarPtr& a, const ScalarPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op != b->op || a->param != b->param || a->ring != b->ring)
    return false;
  if (a->lit.has_value() != b->lit.has_value()) return false;
  if (a->lit && !(*a->lit == *b->lit)) return false;
  if (a->args.size() != b->args.size()) return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!scalar_equal(a->args[i], b->args[i])) return false;
  return true;
}

bool fn_equal(const PointwiseFn& a, const PointwiseFn& b) {
  return a.params == b.params && scalar_equal(a.body, b.body);
}

const Expr& ExprNode::driver() const {
  if (op != ExprOp::ForCounted) bad("driver() on a non-counted loop");
  return args[0];
}

std::size_t ExprNode::init_count() const { return bindings.size(); }

const Expr& ExprNode::init(std::size_t i) const {
  if (op == ExprOp::ForCanonical) return args.at(i);
  if (op == ExprOp::ForCounted) return args.at(i + 1);
  bad("init() on a non-loop node");
}

Expr var(std::string name) {
  if (name.empty()) bad("empty variable name");
  auto n = node(ExprOp::Var);
  n->name = std::move(name);
  return n;
}

namespace {
Expr unary(ExprOp op, Expr e) {
  if (!e) bad("null operand");
  auto n = node(op);
  n->args = {std::move(e)};
  return n;
}
}  // namespace

Expr transpose(Expr e) { return unary(ExprOp::Transpose, std::move(e)); }
Expr ones(Expr e) { return unary(ExprOp::Ones, std::move(e)); }
Expr diag(Expr e) { return unary(ExprOp::Diag, std::move(e)); }
Expr pickany(Expr e) { return unary(ExprOp::PickAny, std::move(e)); }

Expr matmul(Expr a, Expr b) {
  if (!a || !b) bad("null operand");
  auto n = node(ExprOp::MatMul);
  n->args = {std::move(a), std::move(b)};
  return n;
}

Expr apply(PointwiseFn fn, std::vector<Expr> args) {
  if (args.empty()) bad("apply needs at least one argument");
  if (args.size() != fn.params.size())
    bad("apply argument count does not match the parameter count");
  for (const auto& a : args)
    if (!a) bad("null operand");
  auto n = node(ExprOp::Apply);
  n->fn = std::move(fn);
  n->args = std::move(args);
  return n;
}

Expr let_in(std::string name, Expr bound, Expr body) {
  if (name.empty()) bad("empty let binder");
  if (!bound || !body) bad("null operand");
  auto n = node(ExprOp::Let);
  n->name = std::move(name);
  n->args = {std::move(bound), std::move(body)};
  return n;
}

Expr for_canonical(std::string v, std::vector<Binding> bindings,
                   std::vector<Expr> inits) {
  if (v.empty()) bad("empty canonical vector name");
  require_distinct_bindings(bindings);
  for (const auto& b : bindings)
    if (b.name == v) bad("canonical vector shadows binding " + v);
  if (inits.size() != bindings.size()) bad("one init per binding required");
  for (const auto& i : inits)
    if (!i) bad("null init");
  auto n = node(ExprOp::ForCanonical);
  n->name = std::move(v);
  n->bindings = std::move(bindings);
  n->args = std::move(inits);
  return n;
}

Expr for_counted(Expr driver, std::vector<Binding> bindings,
                 std::vector<Expr> inits) {
  if (!driver) bad("null driver");
  require_distinct_bindings(bindings);
  if (inits.size() != bindings.size()) bad("one init per binding required");
  for (const auto& i : inits)
    if (!i) bad("null init");
  auto n = node(ExprOp::ForCounted);
  n->args.reserve(1 + inits.size());
  n->args.push_back(std::move(driver));
  for (auto& i : inits) n->args.push_back(std::move(i));
  n->bindings = std::move(bindings);
  return n;
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op != b->op || a->name != b->name) return false;
  if (a->fn.has_value() != b->fn.has_value()) return false;
  if (a->fn && !fn_equal(*a->fn, *b->fn)) return false;
  if (a->bindings.size() != b->bindings.size()) return false;
  for (std::size_t i = 0; i < a->bindings.size(); ++i) {
    if (a->bindings[i].name != b->bindings[i].name) return false;
    if (!expr_equal(a->bindings[i].body, b->bindings[i].body)) return false;
  }
  if (a->args.size() != b->args.size()) return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!expr_equal(a->args[i], b->args[i])) return false;
  return true;
}

std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> out;
  switch (e->op) {
    case ExprOp::Var:
      out.insert(e->name);
      break;
    case ExprOp::Let: {
      out = free_vars(e->args[0]);
      auto body = free_vars(e->args[1]);
      body.erase(e->name);
      out.insert(body.begin(), body.end());
      break;
    }
    case ExprOp::ForCanonical:
    case ExprOp::ForCounted: {
      if (e->op == ExprOp::ForCounted) out = free_vars(e->driver());
      for (std::size_t i = 0; i < e->init_count(); ++i) {
        auto s = free_vars(e->init(i));
        out.insert(s.begin(), s.end());
      }
      std::set<std::string> body;
      for (const auto& b : e->bindings) {
        auto s = free_vars(b.body);
        body.insert(s.begin(), s.end());
      }
      for (const auto& b : e->bindings) body.erase(b.name);
      if (e->op == ExprOp::ForCanonical) body.erase(e->name);
      out.insert(body.begin(), body.end());
      break;
    }
    default:
      for (const auto& a : e->args) {
        auto s = free_vars(a);
        out.insert(s.begin(), s.end());
      }
  }
  return out;
}

namespace {
void collect_names(const Expr& e, std::set<std::string>& out) {
  if (e->op == ExprOp::Var || e->op == ExprOp::Let ||
      e->op == ExprOp::ForCanonical)
    if (!e->name.empty()) out.insert(e->name);
  for (const auto& b : e->bindings) {
    out.insert(b.name);
    collect_names(b.body, out);
  }
  for (const auto& a : e->args) collect_names(a, out);
}
}  // namespace

std::set<std::string> all_names(const Expr& e) {
  std::set<std::string> out;
  collect_names(e, out);
  return out;
}

std::string fresh_name(const std::set<std::string>& avoid,
                       const std::string& hint) {
  if (!avoid.count(hint)) return hint;
  for (int k = 1;; ++k) {
    std::string c = hint + "_" + std::to_string(k);
    if (!avoid.count(c)) return c;
  }
}

std::string ValidationReport::str() const {
  std::string out;
  for (const auto& v : violations) {
    out += v.rule;
    if (!v.path.empty()) out += " (at " + v.path + ")";
    out += "\n";
  }
  return out;
}

namespace {

struct DialectChecker {
  Dialect d;
  std::string dn;
  bool single;  // pre-multi-ring: ml, for, sifor, dec
  std::optional<Ring> mono;
  std::vector<Violation> out;

  void note(std::string rule, const std::string& path) {
    out.push_back({std::move(rule), path});
  }

  void see_ring(Ring r, const std::string& path) {
    if (!single) return;
    if (!mono) {
      mono = r;
      return;
    }
    if (*mono != r) note("mixed semirings in " + dn, path);
  }

  void scalar(const ScalarPtr& s, const std::string& path) {
    switch (s->op) {
      case ScalarOp::Lit:
        see_ring(s->lit->ring(), path);
        break;
      case ScalarOp::Cast:
        if (single) note("cast not in " + dn, path);
        break;
      case ScalarOp::Enc:
        // An enc-rooted subtree is the machinery of the real-valued
        // encoding; the single-ring dialects treat it as opaque.
        if (single) return;
        if (d == Dialect::CORE) {
          note("enc not in core", path);
          return;
        }
        break;
      case ScalarOp::Dec:
        if (single) note("dec outside enc in " + dn, path);
        if (d == Dialect::CORE) note("dec not in core", path);
        break;
      default:
        break;
    }
    for (std::size_t i = 0; i < s->args.size(); ++i)
      scalar(s->args[i], path + ".s" + std::to_string(i));
  }

  void check(const Expr& e, const std::string& path) {
    switch (e->op) {
      case ExprOp::PickAny:
        if (d == Dialect::ML || d == Dialect::FOR_ML ||
            d == Dialect::SIFOR_ML)
          note("pickAny not in " + dn, path);
        break;
      case ExprOp::ForCanonical:
        if (d != Dialect::FOR_ML && d != Dialect::SIFOR_ML)
          note("canonical loop not in " + dn, path);
        else if (d == Dialect::FOR_ML && e->bindings.size() > 1)
          note("multi-binding loop not in for", path);
        break;
      case ExprOp::ForCounted:
        if (d != Dialect::DEC_ML && d != Dialect::MUSE_ML &&
            d != Dialect::CORE)
          note("counted loop not in " + dn, path);
        break;
      case ExprOp::Apply:
        scalar(e->fn->body, path + ".fn");
        break;
      default:
        break;
    }
    for (const auto& b : e->bindings) check(b.body, path + "." + b.name);
    for (std::size_t i = 0; i < e->args.size(); ++i)
      check(e->args[i], path + ".arg" + std::to_string(i));
  }
};

}  // namespace

ValidationReport validate_dialect(const Expr& e, Dialect d, const Schema& s) {
  DialectChecker c;
  c.d = d;
  c.dn = std::string(dialect_name(d));
  c.single = d == Dialect::ML || d == Dialect::FOR_ML ||
             d == Dialect::SIFOR_ML || d == Dialect::DEC_ML;
  for (const auto& [name, ty] : s) c.see_ring(ty.ring, "schema." + name);
  c.check(e, "in");
  ValidationReport rep;
  rep.violations = std::move(c.out);
  rep.ok = rep.violations.empty();
  return rep;
}

std::optional<Dialect> smallest_dialect(const Expr& e, const Schema& s) {
  for (Dialect d : kDialects)
    if (validate_dialect(e, d, s).ok) return d;
  return std::nullopt;
}

}  // namespace matlang
