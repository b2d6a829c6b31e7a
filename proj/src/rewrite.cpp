#include "matlang/rewrite.hpp"

#include <functional>
#include <stdexcept>

#include "matlang/eval.hpp"

namespace matlang {

std::string LoweringReport::str() const {
  std::string out;
  out += "source: " + std::string(dialect_name(source)) + "\n";
  out += "target: " + std::string(dialect_name(target)) + "\n";
  out += "changed: " + std::string(changed ? "yes" : "no") + "\n";
  out += "encoded: " + std::string(encoded ? "yes" : "no") + "\n";
  if (!fresh_names.empty()) {
    out += "fresh:";
    for (const auto& n : fresh_names) out += " " + n;
    out += "\n";
  }
  if (!macros.empty()) {
    out += "macros:";
    for (const auto& m : macros) out += " " + m + ";";
    out.pop_back();
    out += "\n";
  }
  return out;
}

std::string NameSupply::fresh(const std::string& hint) {
  std::string name = fresh_name(used_, hint);
  used_.insert(name);
  issued_.push_back(name);
  return name;
}

PointwiseFn make_add_fn(Ring r) {
  return make_fn({{"a", r}, {"b", r}}, sc_add(sc_param("a"), sc_param("b")));
}

PointwiseFn make_mul_fn(Ring r) {
  return make_fn({{"a", r}, {"b", r}}, sc_mul(sc_param("a"), sc_param("b")));
}

PointwiseFn make_sub_fn(Ring r) {
  if (r == Ring::Int || r == Ring::Real)
    return make_fn({{"a", r}, {"b", r}}, sc_sub(sc_param("a"), sc_param("b")));
  // b = 1 clears the entry, anything else keeps a; defined on 0/1 inputs.
  ScalarPtr body = sc_cond(
      sc_param("b"), sc_lit(one(r)),
      sc_cond(sc_param("a"), sc_lit(one(r)), sc_lit(zero(r)), sc_lit(zero(r))),
      sc_param("a"));
  return make_fn({{"a", r}, {"b", r}}, std::move(body));
}

PointwiseFn make_const_fn(Ring arg_ring, ScalarValue out) {
  return make_fn({{"c", arg_ring}}, sc_lit(std::move(out)));
}

PointwiseFn make_cast_fn(Ring from, Ring to) {
  return make_fn({{"c", from}}, sc_cast(to, sc_param("c")));
}

bool is_add_fn(const PointwiseFn& fn) {
  return fn.params.size() == 2 &&
         fn.params[0].second == fn.params[1].second &&
         fn_equal(fn, make_add_fn(fn.params[0].second));
}

bool is_sub_fn(const PointwiseFn& fn) {
  return fn.params.size() == 2 &&
         fn.params[0].second == fn.params[1].second &&
         fn_equal(fn, make_sub_fn(fn.params[0].second));
}

Expr zero_like(const Expr& shape_expr, Ring ring) {
  return apply(make_const_fn(ring, zero(ring)), {shape_expr});
}

Expr zero_init_loop(const std::string& v, const std::string& binding,
                    const Expr& body, const Expr& shape_expr, Ring ring) {
  return for_canonical(v, {Binding{binding, body}},
                       {zero_like(shape_expr, ring)});
}

Expr build_emax(const Expr& v_expr, Ring ring, NameSupply& names) {
  std::string v = names.fresh("v");
  std::string x = names.fresh("X");
  return for_canonical(v, {Binding{x, var(v)}}, {zero_like(v_expr, ring)});
}

Expr build_emin(const Expr& v_expr) {
  return transpose(pickany(transpose(ones(v_expr))));
}

Expr build_le_matrix(const Expr& v_expr, Ring ring, NameSupply& names) {
  PointwiseFn add = make_add_fn(ring);
  PointwiseFn sub = make_sub_fn(ring);
  std::string v = names.fresh("v");
  std::string x = names.fresh("X");
  // X + (X * emax + v) * v' + v * emax'
  Expr body = apply(
      add,
      {apply(add,
             {var(x),
              matmul(apply(add, {matmul(var(x), build_emax(v_expr, ring, names)),
                                 var(v)}),
                     transpose(var(v)))}),
       matmul(var(v), transpose(build_emax(v_expr, ring, names)))});
  Expr loop =
      for_canonical(v, {Binding{x, std::move(body)}},
                    {zero_like(diag(v_expr), ring)});
  // The plain loop over-counts the diagonal block; subtract the column
  // pattern 1 * emax' once.
  return apply(sub, {std::move(loop),
                     matmul(ones(v_expr),
                            transpose(build_emax(v_expr, ring, names)))});
}

Expr build_lt_matrix(const Expr& v_expr, Ring ring, NameSupply& names) {
  return apply(make_sub_fn(ring),
               {build_le_matrix(v_expr, ring, names), diag(ones(v_expr))});
}

Expr build_rotate(const Expr& v_expr, Ring ring, NameSupply& names) {
  return apply(make_add_fn(ring),
               {pickany(build_lt_matrix(v_expr, ring, names)),
                matmul(build_emax(v_expr, ring, names),
                       transpose(build_emin(v_expr)))});
}

Expr build_sum_loop(const PointwiseFn& zero_fn, const PointwiseFn& plus_fn,
                    const Expr& v_expr, Ring ring, NameSupply& names) {
  std::string r = names.fresh("R");
  std::string x = names.fresh("X");
  return let_in(
      r, build_rotate(v_expr, ring, names),
      for_counted(v_expr,
                  {Binding{x, apply(plus_fn, {v_expr, matmul(var(r), var(x))})}},
                  {apply(zero_fn, {v_expr})}));
}

Expr build_sum(const PointwiseFn& zero_fn, const PointwiseFn& plus_fn,
               const Expr& v_expr, Ring ring, NameSupply& names) {
  return matmul(transpose(build_emax(v_expr, ring, names)),
                build_sum_loop(zero_fn, plus_fn, v_expr, ring, names));
}

namespace {

template <typename K>
Expr bind_if_needed(const Expr& e, const char* hint, NameSupply& names,
                    K&& k) {
  if (e->op == ExprOp::Var) return k(e);
  std::string n = names.fresh(hint);
  return let_in(n, e, k(var(n)));
}

// All-ones matrix shaped rows(a) x rows(b'): a finite stand-in for a * b
// when only the product's shape is wanted. (Building the product itself
// could overflow or mix sentinel infinities.)
Expr shape_of_product(const Expr& a, const Expr& b) {
  return matmul(ones(a), transpose(ones(transpose(b))));
}

Expr build_cellmul(const ScalarValue& zero_const, const PointwiseFn& plus_fn,
                   const PointwiseFn& times_fn, const Expr& e1_row,
                   const Expr& e2_col, Ring ring, NameSupply& names) {
  Expr cells = apply(times_fn, {transpose(e1_row), e2_col});
  return build_sum(make_const_fn(ring, zero_const), plus_fn, std::move(cells),
                   ring, names);
}

// Fold of e1_row (1 x beta, assumed cheap to reference) against the columns
// of e2, producing 1 x gamma.
Expr build_rowmul(const ScalarValue& zero_const, const PointwiseFn& plus_fn,
                  const PointwiseFn& times_fn, const Expr& e1_row,
                  const Expr& e2, Ring ring, NameSupply& names) {
  return bind_if_needed(e2, "B", names, [&](const Expr& b) {
    std::string w = names.fresh("v");
    std::string x = names.fresh("X");
    std::string bc = names.fresh("c");
    Expr body = let_in(
        bc, matmul(b, var(w)),
        apply(plus_fn,
              {var(x), matmul(build_cellmul(zero_const, plus_fn, times_fn,
                                            e1_row, var(bc), ring, names),
                              transpose(var(w)))}));
    return for_canonical(
        w, {Binding{x, std::move(body)}},
        {apply(make_const_fn(ring, zero_const),
               {shape_of_product(e1_row, b)})});
  });
}

}  // namespace

Expr build_matmul_sim(const ScalarValue& zero_const, const PointwiseFn& plus_fn,
                      const PointwiseFn& times_fn, const Expr& e1,
                      const Expr& e2, Ring ring, NameSupply& names) {
  return bind_if_needed(e1, "A", names, [&](const Expr& a) {
    return bind_if_needed(e2, "B", names, [&](const Expr& b) {
      std::string v = names.fresh("v");
      std::string x = names.fresh("X");
      std::string row = names.fresh("r");
      Expr body = let_in(
          row, matmul(transpose(var(v)), a),
          apply(plus_fn,
                {var(x), matmul(var(v), build_rowmul(zero_const, plus_fn,
                                                     times_fn, var(row), b,
                                                     ring, names))}));
      return for_canonical(v, {Binding{x, std::move(body)}},
                           {apply(make_const_fn(ring, zero_const),
                                  {shape_of_product(a, b)})});
    });
  });
}

Expr expand_pick_any(const Expr& input, Ring ring, NameSupply& names) {
  std::string a = names.fresh("a");   // scanned matrix
  std::string w0 = names.fresh("w");  // all-ones column over its columns
  std::string bb = names.fresh("B");  // all-ones square, row-sum broadcaster
  std::string v = names.fresh("v");   // row scanner
  std::string x = names.fresh("X");   // accumulator
  std::string r = names.fresh("r");   // current row
  std::string f = names.fresh("F");   // finished row
  std::string w = names.fresh("v");   // column scanner
  std::string y = names.fresh("Y");   // picked-cell holder
  std::string d = names.fresh("D");   // already-picked detector
  std::string pn = names.fresh("P");  // proposal

  // Takes the proposal exactly while nothing has been picked yet.
  PointwiseFn keep =
      make_fn({{"y", ring}, {"d", ring}, {"p", ring}},
              sc_cond(sc_param("d"), sc_lit(zero(ring)), sc_param("p"),
                      sc_param("y")));
  PointwiseFn zf = make_const_fn(ring, zero(ring));
  PointwiseFn addf = make_add_fn(ring);

  Expr inner = for_canonical(
      w,
      {Binding{y, let_in(d, matmul(var(y), var(bb)),
                         let_in(pn, matmul(var(r), diag(var(w))),
                                apply(keep, {var(y), var(d), var(pn)})))}},
      {apply(zf, {transpose(var(w0))})});
  Expr outer_body =
      let_in(r, matmul(transpose(var(v)), var(a)),
             let_in(f, std::move(inner),
                    apply(addf, {var(x), matmul(var(v), var(f))})));
  Expr loop = for_canonical(v, {Binding{x, std::move(outer_body)}},
                            {apply(zf, {var(a)})});
  return let_in(a, input,
                let_in(w0, ones(transpose(var(a))),
                       let_in(bb, matmul(var(w0), transpose(var(w0))),
                              std::move(loop))));
}

namespace {

[[noreturn]] void dialect_fail(const Expr& e, Dialect d, const Schema& s) {
  ValidationReport rep = validate_dialect(e, d, s);
  throw DialectError("not a valid " + std::string(dialect_name(d)) +
                     " program:\n" + rep.str());
}

void require_valid(const Expr& e, Dialect d, const Schema& s) {
  if (!validate_dialect(e, d, s).ok) dialect_fail(e, d, s);
}

NameSupply supply_for(const Schema& s, const Expr& e) {
  std::set<std::string> used = all_names(e);
  for (const auto& [name, ty] : s) {
    (void)ty;
    used.insert(name);
  }
  return NameSupply(std::move(used));
}

// Theorem-2 direction: every canonical loop becomes a counted loop that
// regenerates the basis vectors itself via two tracking bindings.
struct CanonicalStripper {
  const TypedProgram& types;
  NameSupply& names;
  LoweringReport& rep;
  const Schema& base;
  std::vector<std::pair<std::string, MatrixType>> scope;

  const MatrixType* lookup(const std::string& name) const {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (it->first == name) return &it->second;
    auto it = base.find(name);
    return it == base.end() ? nullptr : &it->second;
  }

  const MatrixType& type_of(const Expr& e) const {
    return types.node_types.at(e.get());
  }

  // A column-vector expression of li.count rows that is well-formed in the
  // scope enclosing the loop. Prefers the canonical name itself when it is
  // bound to a matching vector, then derives one from any in-scope matrix
  // with a matching dimension.
  Expr driver_for(const Expr& loop, const LoopInfo& li) const {
    const MatrixType* seed = lookup(loop->name);
    if (seed && seed->cols.is_one() && seed->rows == li.count)
      return var(loop->name);
    auto candidate = [&](const std::string& name,
                         const MatrixType& ty) -> Expr {
      if (ty.rows == li.count) return ones(var(name));
      if (ty.cols == li.count) return ones(transpose(var(name)));
      if (li.count.is_one()) return ones(transpose(ones(var(name))));
      return nullptr;
    };
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (Expr d = candidate(it->first, it->second)) return d;
    for (const auto& [name, ty] : base)
      if (Expr d = candidate(name, ty)) return d;
    throw std::logic_error("no in-scope source for the loop driver of " +
                           loop->name);
  }

  Expr strip(const Expr& e) {
    switch (e->op) {
      case ExprOp::Var:
        return e;
      case ExprOp::Transpose:
        return transpose(strip(e->args[0]));
      case ExprOp::Ones:
        return ones(strip(e->args[0]));
      case ExprOp::Diag:
        return diag(strip(e->args[0]));
      case ExprOp::PickAny:
        return pickany(strip(e->args[0]));
      case ExprOp::MatMul:
        return matmul(strip(e->args[0]), strip(e->args[1]));
      case ExprOp::Apply: {
        std::vector<Expr> args;
        for (const auto& a : e->args) args.push_back(strip(a));
        return apply(*e->fn, std::move(args));
      }
      case ExprOp::Let: {
        Expr bound = strip(e->args[0]);
        scope.emplace_back(e->name, type_of(e->args[0]));
        Expr body = strip(e->args[1]);
        scope.pop_back();
        return let_in(e->name, std::move(bound), std::move(body));
      }
      case ExprOp::ForCounted: {
        Expr driver = strip(e->driver());
        std::vector<Expr> inits;
        for (std::size_t i = 0; i < e->init_count(); ++i)
          inits.push_back(strip(e->init(i)));
        std::size_t mark = scope.size();
        for (std::size_t i = 0; i < e->bindings.size(); ++i)
          scope.emplace_back(e->bindings[i].name, type_of(e->init(i)));
        std::vector<Binding> bindings;
        for (const auto& b : e->bindings)
          bindings.push_back({b.name, strip(b.body)});
        scope.resize(mark);
        return for_counted(std::move(driver), std::move(bindings),
                           std::move(inits));
      }
      case ExprOp::ForCanonical: {
        const LoopInfo& li = types.canonical_loops.at(e.get());
        std::vector<Expr> inits;
        for (std::size_t i = 0; i < e->init_count(); ++i)
          inits.push_back(strip(e->init(i)));
        Expr driver = driver_for(e, li);

        std::size_t mark = scope.size();
        for (std::size_t i = 0; i < e->bindings.size(); ++i)
          scope.emplace_back(e->bindings[i].name, type_of(e->init(i)));
        scope.emplace_back(e->name,
                           MatrixType{li.count, SizeTerm::one(), li.v_ring});
        std::vector<Binding> bindings;
        for (const auto& b : e->bindings)
          bindings.push_back({b.name, strip(b.body)});
        scope.resize(mark);

        std::string tracker = names.fresh("V");
        PointwiseFn sub = make_sub_fn(li.v_ring);
        Expr knock =
            apply(sub, {var(tracker), transpose(var(e->name))});
        bindings.push_back({e->name, transpose(pickany(knock))});
        bindings.push_back({tracker, knock});
        inits.push_back(
            transpose(pickany(transpose(ones(driver)))));
        inits.push_back(transpose(ones(driver)));

        rep.changed = true;
        rep.macros.push_back("canonical loop elimination");
        return for_counted(driver, std::move(bindings), std::move(inits));
      }
    }
    throw std::logic_error("unknown op");
  }
};

Expr strip_canonical_loops(const Schema& s, const Expr& e,
                           const TypedProgram& types, NameSupply& names,
                           LoweringReport& rep) {
  CanonicalStripper st{types, names, rep, s, {}};
  return st.strip(e);
}

// Theorem-2 reverse direction: counted loops ride on a let-bound driver
// vector, pickAny nodes expand to the nested row/column scan.
struct CountedDesugarer {
  const TypedProgram& types;
  NameSupply& names;
  LoweringReport& rep;

  Expr walk(const Expr& e) {
    switch (e->op) {
      case ExprOp::Var:
        return e;
      case ExprOp::Transpose:
        return transpose(walk(e->args[0]));
      case ExprOp::Ones:
        return ones(walk(e->args[0]));
      case ExprOp::Diag:
        return diag(walk(e->args[0]));
      case ExprOp::MatMul:
        return matmul(walk(e->args[0]), walk(e->args[1]));
      case ExprOp::Apply: {
        std::vector<Expr> args;
        for (const auto& a : e->args) args.push_back(walk(a));
        return apply(*e->fn, std::move(args));
      }
      case ExprOp::Let:
        return let_in(e->name, walk(e->args[0]), walk(e->args[1]));
      case ExprOp::PickAny: {
        Ring r = types.node_types.at(e.get()).ring;
        rep.changed = true;
        rep.macros.push_back("pickany expansion");
        return expand_pick_any(walk(e->args[0]), r, names);
      }
      case ExprOp::ForCanonical: {
        std::vector<Binding> bindings;
        for (const auto& b : e->bindings)
          bindings.push_back({b.name, walk(b.body)});
        std::vector<Expr> inits;
        for (std::size_t i = 0; i < e->init_count(); ++i)
          inits.push_back(walk(e->init(i)));
        return for_canonical(e->name, std::move(bindings), std::move(inits));
      }
      case ExprOp::ForCounted: {
        Expr driver = walk(e->driver());
        std::vector<Binding> bindings;
        for (const auto& b : e->bindings)
          bindings.push_back({b.name, walk(b.body)});
        std::vector<Expr> inits;
        for (std::size_t i = 0; i < e->init_count(); ++i)
          inits.push_back(walk(e->init(i)));
        std::string d = names.fresh("d");
        rep.changed = true;
        rep.macros.push_back("counted loop to canonical");
        return let_in(d, std::move(driver),
                      for_canonical(d, std::move(bindings), std::move(inits)));
      }
    }
    throw std::logic_error("unknown op");
  }
};

// Theorem-3 phase A: move every matrix to the reals, conjugating pointwise
// work through the ring encodings and spelling out matrix multiplies.
struct Encoder {
  const TypedProgram& types;
  NameSupply& names;
  LoweringReport& rep;

  Ring ring_of(const Expr& e) const {
    return types.node_types.at(e.get()).ring;
  }

  ScalarPtr decode_params(const ScalarPtr& s,
                          const std::map<std::string, Ring>& rings) const {
    if (s->op == ScalarOp::Param)
      return sc_dec(rings.at(s->param), sc_param(s->param));
    auto n = std::make_shared<ScalarNode>(*s);
    for (auto& a : n->args) a = decode_params(a, rings);
    return n;
  }

  PointwiseFn hat(const PointwiseFn& f) const {
    std::map<std::string, Ring> rings;
    std::vector<std::pair<std::string, Ring>> params;
    for (const auto& [n, r] : f.params) {
      rings[n] = r;
      params.emplace_back(n, Ring::Real);
    }
    Ring out = check_scalar(rings, f.body);
    return make_fn(std::move(params), sc_enc(out, decode_params(f.body, rings)));
  }

  PointwiseFn hat_binop(Ring r, bool add) const {
    ScalarPtr a = sc_dec(r, sc_param("a"));
    ScalarPtr b = sc_dec(r, sc_param("b"));
    ScalarPtr body = add ? sc_add(std::move(a), std::move(b))
                         : sc_mul(std::move(a), std::move(b));
    return make_fn({{"a", Ring::Real}, {"b", Ring::Real}},
                   sc_enc(r, std::move(body)));
  }

  Expr enc(const Expr& e) {
    switch (e->op) {
      case ExprOp::Var:
        return var(e->name);
      case ExprOp::Transpose:
        return transpose(enc(e->args[0]));
      case ExprOp::Diag:
        return diag(enc(e->args[0]));
      case ExprOp::Ones: {
        Ring r = ring_of(e);
        rep.macros.push_back("ones constant");
        return apply(make_const_fn(Ring::Real, enc_value(r, one(r))),
                     {ones(enc(e->args[0]))});
      }
      case ExprOp::PickAny: {
        Ring r = ring_of(e);
        rep.macros.push_back("pickany mask");
        std::string t = names.fresh("E");
        ScalarValue zero_t = ScalarValue::of_real(Ring::Real, 0.0);
        ScalarValue one_t = ScalarValue::of_real(Ring::Real, 1.0);
        PointwiseFn nonzero_mask =
            make_fn({{"v", Ring::Real}},
                    sc_cond(sc_param("v"), sc_lit(enc_value(r, zero(r))),
                            sc_lit(zero_t), sc_lit(one_t)));
        PointwiseFn keep_masked =
            make_fn({{"v", Ring::Real}, {"p", Ring::Real}},
                    sc_cond(sc_param("p"), sc_lit(one_t), sc_param("v"),
                            sc_lit(enc_value(r, zero(r)))));
        return let_in(
            t, enc(e->args[0]),
            apply(keep_masked,
                  {var(t), pickany(apply(nonzero_mask, {var(t)}))}));
      }
      case ExprOp::MatMul: {
        Ring r = ring_of(e);
        rep.macros.push_back("matmul simulation");
        Expr a = enc(e->args[0]);
        Expr b = enc(e->args[1]);
        return build_matmul_sim(enc_value(r, zero(r)), hat_binop(r, true),
                                hat_binop(r, false), std::move(a), std::move(b),
                                Ring::Real, names);
      }
      case ExprOp::Apply: {
        std::vector<Expr> args;
        for (const auto& a : e->args) args.push_back(enc(a));
        return apply(hat(*e->fn), std::move(args));
      }
      case ExprOp::Let:
        return let_in(e->name, enc(e->args[0]), enc(e->args[1]));
      case ExprOp::ForCounted: {
        Expr driver = enc(e->driver());
        std::vector<Binding> bindings;
        for (const auto& b : e->bindings)
          bindings.push_back({b.name, enc(b.body)});
        std::vector<Expr> inits;
        for (std::size_t i = 0; i < e->init_count(); ++i)
          inits.push_back(enc(e->init(i)));
        return for_counted(std::move(driver), std::move(bindings),
                           std::move(inits));
      }
      case ExprOp::ForCanonical:
        throw std::logic_error("canonical loop reached the encoder");
    }
    throw std::logic_error("unknown op");
  }
};

Lowered identity_lowered(const Schema& s, const Expr& e, Dialect target) {
  Lowered out{s, e, {}};
  auto d = smallest_dialect(e, s);
  out.report.source = d ? *d : target;
  out.report.target = target;
  return out;
}

}  // namespace

Lowered lower_for_to_sifor(const Schema& s, const Expr& e) {
  // The shared node set already represents single-binding loops as loops
  // with expression inits, so membership is the only thing to establish.
  require_valid(e, Dialect::SIFOR_ML, s);
  return identity_lowered(s, e, Dialect::SIFOR_ML);
}

Lowered lower_sifor_to_dec(const Schema& s, const Expr& e) {
  if (validate_dialect(e, Dialect::DEC_ML, s).ok)
    return identity_lowered(s, e, Dialect::DEC_ML);
  require_valid(e, Dialect::SIFOR_ML, s);
  TypedProgram types = infer_program(s, e);
  NameSupply names = supply_for(s, e);
  Lowered out{s, nullptr, {}};
  auto d = smallest_dialect(e, s);
  out.report.source = d ? *d : Dialect::SIFOR_ML;
  out.report.target = Dialect::DEC_ML;
  out.expr = strip_canonical_loops(s, e, types, names, out.report);
  out.report.fresh_names = names.issued();
  require_valid(out.expr, Dialect::DEC_ML, out.schema);
  return out;
}

Lowered lower_dec_to_sifor(const Schema& s, const Expr& e) {
  if (validate_dialect(e, Dialect::SIFOR_ML, s).ok)
    return identity_lowered(s, e, Dialect::SIFOR_ML);
  require_valid(e, Dialect::DEC_ML, s);
  TypedProgram types = infer_program(s, e);
  NameSupply names = supply_for(s, e);
  Lowered out{s, nullptr, {}};
  auto d = smallest_dialect(e, s);
  out.report.source = d ? *d : Dialect::DEC_ML;
  out.report.target = Dialect::SIFOR_ML;
  CountedDesugarer ds{types, names, out.report};
  out.expr = ds.walk(e);
  out.report.fresh_names = names.issued();
  require_valid(out.expr, Dialect::SIFOR_ML, out.schema);
  return out;
}

Lowered encode_program(const Schema& s, const Expr& e) {
  require_valid(e, Dialect::MUSE_ML, s);
  TypedProgram types = infer_program(s, e);
  NameSupply names = supply_for(s, e);
  Lowered out{{}, nullptr, {}};
  auto d = smallest_dialect(e, s);
  out.report.source = d ? *d : Dialect::MUSE_ML;
  out.report.target = Dialect::MUSE_ML;
  out.report.changed = true;
  out.report.encoded = true;
  for (const auto& [name, ty] : s)
    out.schema.emplace(name, MatrixType{ty.rows, ty.cols, Ring::Real});
  Encoder enc{types, names, out.report};
  out.expr = enc.enc(e);
  out.report.fresh_names = names.issued();
  return out;
}

Lowered lower_muse_to_dec(const Schema& s, const Expr& e) {
  if (validate_dialect(e, Dialect::DEC_ML, s).ok)
    return identity_lowered(s, e, Dialect::DEC_ML);
  require_valid(e, Dialect::MUSE_ML, s);
  TypedProgram types = infer_program(s, e);
  NameSupply names = supply_for(s, e);
  Lowered out{{}, nullptr, {}};
  auto d = smallest_dialect(e, s);
  out.report.source = d ? *d : Dialect::MUSE_ML;
  out.report.target = Dialect::DEC_ML;
  out.report.changed = true;
  out.report.encoded = true;
  for (const auto& [name, ty] : s)
    out.schema.emplace(name, MatrixType{ty.rows, ty.cols, Ring::Real});
  Encoder enc{types, names, out.report};
  Expr hybrid = enc.enc(e);
  TypedProgram hybrid_types = infer_program(out.schema, hybrid);
  out.expr = strip_canonical_loops(out.schema, hybrid, hybrid_types, names,
                                   out.report);
  out.report.fresh_names = names.issued();
  require_valid(out.expr, Dialect::DEC_ML, out.schema);
  return out;
}

Lowered simulate_core_in_sifor(const Schema& s, const Expr& e) {
  if (validate_dialect(e, Dialect::SIFOR_ML, s).ok)
    return identity_lowered(s, e, Dialect::SIFOR_ML);
  Lowered a = lower_muse_to_dec(s, e);
  Lowered b = lower_dec_to_sifor(a.schema, a.expr);
  Lowered out{b.schema, b.expr, a.report};
  out.report.target = Dialect::SIFOR_ML;
  out.report.changed = a.report.changed || b.report.changed;
  out.report.fresh_names.insert(out.report.fresh_names.end(),
                                b.report.fresh_names.begin(),
                                b.report.fresh_names.end());
  out.report.macros.insert(out.report.macros.end(), b.report.macros.begin(),
                           b.report.macros.end());
  return out;
}

Lowered lower_to(const Schema& s, const Expr& e, Dialect target) {
  if (target == Dialect::DEC_ML) {
    if (validate_dialect(e, Dialect::DEC_ML, s).ok)
      return identity_lowered(s, e, Dialect::DEC_ML);
    if (validate_dialect(e, Dialect::SIFOR_ML, s).ok)
      return lower_sifor_to_dec(s, e);
    if (validate_dialect(e, Dialect::MUSE_ML, s).ok)
      return lower_muse_to_dec(s, e);
    throw DialectError("program fits no dialect this pass lowers from");
  }
  if (target == Dialect::SIFOR_ML) {
    if (validate_dialect(e, Dialect::SIFOR_ML, s).ok)
      return identity_lowered(s, e, Dialect::SIFOR_ML);
    if (validate_dialect(e, Dialect::DEC_ML, s).ok)
      return lower_dec_to_sifor(s, e);
    if (validate_dialect(e, Dialect::MUSE_ML, s).ok)
      return simulate_core_in_sifor(s, e);
    throw DialectError("program fits no dialect this pass lowers from");
  }
  throw std::invalid_argument("lowering targets are dec and sifor");
}

}  // namespace matlang
