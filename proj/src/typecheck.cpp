#include "matlang/typecheck.hpp"

#include <stdexcept>

namespace matlang {

std::string TypeErrorInfo::str() const {
  std::string out = rule;
  if (!path.empty()) out += " (at " + path + ")";
  if (!expected.empty()) out += "; expected " + expected;
  if (!found.empty()) out += "; found " + found;
  return out;
}

namespace {

bool is_fresh(const SizeTerm& t) {
  return !t.is_one() && t.name()[0] == '$';
}

struct Checker {
  const Schema& base;
  std::vector<std::pair<std::string, MatrixType>> stack;
  std::map<std::string, SizeTerm> subst;  // fresh symbol -> term
  int fresh_counter = 0;
  std::set<std::string> live_fresh;  // iteration counts of enclosing loops
  std::map<const ExprNode*, MatrixType> node_types;
  std::map<const ExprNode*, LoopInfo> loops;

  explicit Checker(const Schema& schema) : base(schema) {}

  SizeTerm fresh() {
    return SizeTerm::sym("$" + std::to_string(++fresh_counter));
  }

  SizeTerm resolve(SizeTerm t) const {
    while (is_fresh(t)) {
      auto it = subst.find(t.name());
      if (it == subst.end()) break;
      t = it->second;
    }
    return t;
  }

  bool unify(const SizeTerm& a, const SizeTerm& b) {
    SizeTerm x = resolve(a), y = resolve(b);
    if (x == y) return true;
    if (is_fresh(x)) {
      subst.emplace(x.name(), y);
      return true;
    }
    if (is_fresh(y)) {
      subst.emplace(y.name(), x);
      return true;
    }
    return false;
  }

  MatrixType resolved(MatrixType t) const {
    t.rows = resolve(t.rows);
    t.cols = resolve(t.cols);
    return t;
  }

  [[noreturn]] void fail(const std::string& path, const std::string& rule,
                         const std::string& expected,
                         const std::string& found) const {
    throw TypeCheckError(TypeErrorInfo{path, rule, expected, found});
  }

  const MatrixType* lookup(const std::string& name) const {
    for (auto it = stack.rbegin(); it != stack.rend(); ++it)
      if (it->first == name) return &it->second;
    auto it = base.find(name);
    return it == base.end() ? nullptr : &it->second;
  }

  Ring scalar(const std::map<std::string, Ring>& params, const ScalarPtr& s,
              const std::string& path) const {
    switch (s->op) {
      case ScalarOp::Param: {
        auto it = params.find(s->param);
        if (it == params.end())
          fail(path, "unbound parameter", "", s->param);
        return it->second;
      }
      case ScalarOp::Lit:
        return s->lit->ring();
      case ScalarOp::Add:
      case ScalarOp::Mul: {
        Ring a = scalar(params, s->args[0], path + ".s0");
        Ring b = scalar(params, s->args[1], path + ".s1");
        if (a != b)
          fail(path, "scalar ring", std::string(ring_name(a)),
               std::string(ring_name(b)));
        return a;
      }
      case ScalarOp::Sub: {
        Ring a = scalar(params, s->args[0], path + ".s0");
        Ring b = scalar(params, s->args[1], path + ".s1");
        if (a != b || (a != Ring::Int && a != Ring::Real))
          fail(path, "sub ring", "int or real on both sides",
               std::string(ring_name(a)) + ", " + std::string(ring_name(b)));
        return a;
      }
      case ScalarOp::Div: {
        Ring a = scalar(params, s->args[0], path + ".s0");
        Ring b = scalar(params, s->args[1], path + ".s1");
        if (a != Ring::Real || b != Ring::Real)
          fail(path, "div ring", "real on both sides",
               std::string(ring_name(a)) + ", " + std::string(ring_name(b)));
        return Ring::Real;
      }
      case ScalarOp::Eq: {
        Ring a = scalar(params, s->args[0], path + ".s0");
        Ring b = scalar(params, s->args[1], path + ".s1");
        if (a != b)
          fail(path, "eq ring", std::string(ring_name(a)),
               std::string(ring_name(b)));
        return Ring::Bool;
      }
      case ScalarOp::Cast:
        scalar(params, s->args[0], path + ".s0");
        return s->ring;
      case ScalarOp::Cond: {
        Ring w = scalar(params, s->args[0], path + ".s0");
        Ring x = scalar(params, s->args[1], path + ".s1");
        Ring y = scalar(params, s->args[2], path + ".s2");
        Ring z = scalar(params, s->args[3], path + ".s3");
        if (w != x)
          fail(path, "cond ring", std::string(ring_name(w)),
               std::string(ring_name(x)));
        if (y != z)
          fail(path, "cond ring", std::string(ring_name(y)),
               std::string(ring_name(z)));
        return y;
      }
      case ScalarOp::Enc: {
        Ring a = scalar(params, s->args[0], path + ".s0");
        if (a != s->ring)
          fail(path, "enc ring", std::string(ring_name(s->ring)),
               std::string(ring_name(a)));
        return Ring::Real;
      }
      case ScalarOp::Dec: {
        Ring a = scalar(params, s->args[0], path + ".s0");
        if (a != Ring::Real)
          fail(path, "dec ring", "real", std::string(ring_name(a)));
        return s->ring;
      }
    }
    fail(path, "unknown scalar op", "", "");
  }

  // Unifies a loop body's type against its binding's init type.
  void match_binding(const MatrixType& init, const MatrixType& body,
                     const std::string& path) {
    if (init.ring != body.ring || !unify(init.rows, body.rows) ||
        !unify(init.cols, body.cols))
      fail(path, "loop body type", resolved(init).str(),
           resolved(body).str());
  }

  MatrixType record(const ExprNode* n, MatrixType t) {
    node_types.emplace(n, t);
    return t;
  }

  MatrixType check(const Expr& e, const std::string& path) {
    switch (e->op) {
      case ExprOp::Var: {
        const MatrixType* t = lookup(e->name);
        if (!t) fail(path, "unbound variable", "", e->name);
        return record(e.get(), *t);
      }
      case ExprOp::Transpose: {
        MatrixType t = check(e->args[0], path + ".arg0");
        return record(e.get(), {t.cols, t.rows, t.ring});
      }
      case ExprOp::Ones: {
        MatrixType t = check(e->args[0], path + ".arg0");
        return record(e.get(), {t.rows, SizeTerm::one(), t.ring});
      }
      case ExprOp::Diag: {
        MatrixType t = check(e->args[0], path + ".arg0");
        if (!unify(t.cols, SizeTerm::one()))
          fail(path, "diag needs a column vector", "column vector",
               resolved(t).str());
        return record(e.get(), {t.rows, t.rows, t.ring});
      }
      case ExprOp::MatMul: {
        MatrixType a = check(e->args[0], path + ".arg0");
        MatrixType b = check(e->args[1], path + ".arg1");
        if (a.ring != b.ring)
          fail(path, "matmul ring", std::string(ring_name(a.ring)),
               std::string(ring_name(b.ring)));
        if (!unify(a.cols, b.rows))
          fail(path, "matmul inner dims", resolved(a).str(),
               resolved(b).str());
        return record(e.get(), {a.rows, b.cols, a.ring});
      }
      case ExprOp::Apply: {
        const PointwiseFn& fn = *e->fn;
        MatrixType first;
        std::map<std::string, Ring> params;
        for (std::size_t i = 0; i < e->args.size(); ++i) {
          MatrixType t = check(e->args[i], path + ".arg" + std::to_string(i));
          if (t.ring != fn.params[i].second)
            fail(path, "apply argument ring",
                 std::string(ring_name(fn.params[i].second)),
                 std::string(ring_name(t.ring)));
          if (i == 0) {
            first = t;
          } else if (!unify(first.rows, t.rows) ||
                     !unify(first.cols, t.cols)) {
            fail(path, "apply argument dims", resolved(first).str(),
                 resolved(t).str());
          }
          params[fn.params[i].first] = fn.params[i].second;
        }
        Ring out = scalar(params, fn.body, path + ".fn");
        return record(e.get(), {first.rows, first.cols, out});
      }
      case ExprOp::PickAny: {
        MatrixType t = check(e->args[0], path + ".arg0");
        return record(e.get(), t);
      }
      case ExprOp::Let: {
        MatrixType bound = check(e->args[0], path + ".bound");
        stack.emplace_back(e->name, bound);
        MatrixType t = check(e->args[1], path + ".body");
        stack.pop_back();
        return record(e.get(), t);
      }
      case ExprOp::ForCanonical: {
        std::vector<MatrixType> inits;
        for (std::size_t i = 0; i < e->init_count(); ++i)
          inits.push_back(check(e->init(i), path + ".init" + std::to_string(i)));

        SizeTerm count = fresh();
        Ring v_ring;
        const MatrixType* seed = lookup(e->name);
        if (seed && resolve(seed->cols).is_one()) {
          // `for v` over an in-scope column vector iterates over that
          // vector's canonical basis.
          unify(count, seed->rows);
          v_ring = seed->ring;
        } else {
          std::set<Ring> rings;
          for (const auto& [n, t] : base) {
            (void)n;
            rings.insert(t.ring);
          }
          for (const auto& [n, t] : stack) {
            (void)n;
            rings.insert(t.ring);
          }
          if (rings.size() == 1) {
            v_ring = *rings.begin();
          } else {
            bool used = false;
            for (const auto& b : e->bindings)
              if (free_vars(b.body).count(e->name)) used = true;
            if (used)
              fail(path, "canonical vector ring ambiguous", "one ring in scope",
                   std::to_string(rings.size()) + " rings");
            v_ring = Ring::Bool;
          }
        }

        std::size_t mark = stack.size();
        for (std::size_t i = 0; i < e->bindings.size(); ++i)
          stack.emplace_back(e->bindings[i].name, inits[i]);
        stack.emplace_back(e->name, MatrixType{count, SizeTerm::one(), v_ring});
        live_fresh.insert(count.name());
        for (std::size_t i = 0; i < e->bindings.size(); ++i) {
          MatrixType bt =
              check(e->bindings[i].body, path + "." + e->bindings[i].name);
          match_binding(inits[i], bt, path + "." + e->bindings[i].name);
        }
        live_fresh.erase(count.name());
        stack.resize(mark);

        SizeTerm got = resolve(count);
        if (is_fresh(got) && !live_fresh.count(got.name()))
          fail(path, "loop count unresolved", "a concrete vector length",
               "no constraint fixes the canonical vector");
        loops.emplace(e.get(), LoopInfo{got, v_ring});
        return record(e.get(), inits[0]);
      }
      case ExprOp::ForCounted: {
        MatrixType d = check(e->driver(), path + ".driver");
        if (!unify(d.cols, SizeTerm::one()))
          fail(path, "loop driver not a column vector", "column vector",
               resolved(d).str());
        std::vector<MatrixType> inits;
        for (std::size_t i = 0; i < e->init_count(); ++i)
          inits.push_back(check(e->init(i), path + ".init" + std::to_string(i)));
        std::size_t mark = stack.size();
        for (std::size_t i = 0; i < e->bindings.size(); ++i)
          stack.emplace_back(e->bindings[i].name, inits[i]);
        for (std::size_t i = 0; i < e->bindings.size(); ++i) {
          MatrixType bt =
              check(e->bindings[i].body, path + "." + e->bindings[i].name);
          match_binding(inits[i], bt, path + "." + e->bindings[i].name);
        }
        stack.resize(mark);
        return record(e.get(), inits[0]);
      }
    }
    fail(path, "unknown op", "", "");
  }
};

}  // namespace

TypedProgram infer_program(const Schema& schema, const Expr& e) {
  Checker c(schema);
  MatrixType root = c.check(e, "in");
  TypedProgram out;
  out.type = c.resolved(root);
  for (auto& [n, t] : c.node_types) {
    MatrixType r = c.resolved(t);
    if (is_fresh(r.rows) || is_fresh(r.cols))
      throw std::logic_error("inference left an unresolved size in " +
                             r.str());
    out.node_types.emplace(n, r);
  }
  for (auto& [n, li] : c.loops) {
    LoopInfo r{c.resolve(li.count), li.v_ring};
    if (is_fresh(r.count))
      throw std::logic_error("inference left an unresolved loop count");
    out.canonical_loops.emplace(n, r);
  }
  return out;
}

MatrixType infer_type(const Schema& schema, const Expr& e) {
  return infer_program(schema, e).type;
}

Ring check_scalar(const std::map<std::string, Ring>& params,
                  const ScalarPtr& s) {
  Schema empty;
  Checker c(empty);
  return c.scalar(params, s, "scalar");
}

Schema loop_step_schema(const Schema& outer, const Expr& loop_node) {
  if (loop_node->op != ExprOp::ForCanonical &&
      loop_node->op != ExprOp::ForCounted)
    throw std::invalid_argument("loop_step_schema needs a loop node");
  Checker c(outer);
  c.check(loop_node, "in");
  Schema out = outer;
  for (std::size_t i = 0; i < loop_node->bindings.size(); ++i)
    out[loop_node->bindings[i].name] =
        c.resolved(c.node_types.at(loop_node->init(i).get()));
  if (loop_node->op == ExprOp::ForCanonical) {
    const LoopInfo& li = c.loops.at(loop_node.get());
    out[loop_node->name] =
        MatrixType{c.resolve(li.count), SizeTerm::one(), li.v_ring};
  }
  return out;
}

}  // namespace matlang
