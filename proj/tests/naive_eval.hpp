#pragma once

// A second, deliberately naive evaluator used as an oracle: plain recursion,
// copy-the-map environments, and nothing shared with the library evaluator
// beyond the scalar value type and its ring operations. Canonical loops
// require the vector's name to be pre-bound in the environment (to any
// column vector of the right length and ring), which every test here
// arranges; the library evaluator's seeding rules are part of what this
// oracle cross-checks, so they are not reimplemented.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "matlang/eval.hpp"
#include "matlang/ir.hpp"
#include "matlang/semiring.hpp"

namespace matlang::testing {

using NaiveEnv = std::map<std::string, Matrix>;

inline ScalarValue naive_scalar(const std::map<std::string, ScalarValue>& env,
                                const ScalarPtr& s) {
  auto arg = [&](std::size_t i) { return naive_scalar(env, s->args[i]); };
  switch (s->op) {
    case ScalarOp::Param: return env.at(s->param);
    case ScalarOp::Lit: return *s->lit;
    case ScalarOp::Add: return sr_add(arg(0), arg(1));
    case ScalarOp::Mul: return sr_mul(arg(0), arg(1));
    case ScalarOp::Sub: return sr_sub(arg(0), arg(1));
    case ScalarOp::Div: return sr_div(arg(0), arg(1));
    case ScalarOp::Eq: return sr_eq(arg(0), arg(1));
    case ScalarOp::Cast: {
      ScalarValue v = arg(0);
      return cast_value(v.ring(), s->ring, v);
    }
    case ScalarOp::Cond: {
      ScalarValue w = arg(0), x = arg(1);
      return w == x ? arg(2) : arg(3);
    }
    case ScalarOp::Enc: return enc_value(s->ring, arg(0));
    case ScalarOp::Dec: return dec_value(s->ring, arg(0));
  }
  throw std::logic_error("naive_scalar: unknown op");
}

inline Matrix naive_eval(const Expr& e, const NaiveEnv& env) {
  switch (e->op) {
    case ExprOp::Var: return env.at(e->name);
    case ExprOp::Transpose: {
      Matrix a = naive_eval(e->args[0], env);
      Matrix out(a.cols(), a.rows(), a.ring());
      for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out.set(j, i, a.at(i, j));
      return out;
    }
    case ExprOp::Ones: {
      Matrix a = naive_eval(e->args[0], env);
      return Matrix(a.rows(), 1, a.ring(), one(a.ring()));
    }
    case ExprOp::Diag: {
      Matrix a = naive_eval(e->args[0], env);
      if (a.cols() != 1) throw std::logic_error("naive: diag of non-vector");
      Matrix out(a.rows(), a.rows(), a.ring());
      for (std::size_t i = 0; i < a.rows(); ++i) out.set(i, i, a.at(i, 0));
      return out;
    }
    case ExprOp::MatMul: {
      Matrix a = naive_eval(e->args[0], env);
      Matrix b = naive_eval(e->args[1], env);
      if (a.cols() != b.rows() || a.ring() != b.ring())
        throw std::logic_error("naive: bad product");
      Matrix out(a.rows(), b.cols(), a.ring());
      for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
          ScalarValue acc = zero(a.ring());
          for (std::size_t k = 0; k < a.cols(); ++k)
            acc = sr_add(acc, sr_mul(a.at(i, k), b.at(k, j)));
          out.set(i, j, acc);
        }
      return out;
    }
    case ExprOp::Apply: {
      std::vector<Matrix> args;
      for (const Expr& a : e->args) args.push_back(naive_eval(a, env));
      const PointwiseFn& fn = *e->fn;
      Matrix out(args[0].rows(), args[0].cols(), Ring::Bool);
      bool first = true;
      for (std::size_t i = 0; i < args[0].rows(); ++i)
        for (std::size_t j = 0; j < args[0].cols(); ++j) {
          std::map<std::string, ScalarValue> senv;
          for (std::size_t k = 0; k < args.size(); ++k)
            senv.emplace(fn.params[k].first, args[k].at(i, j));
          ScalarValue v = naive_scalar(senv, fn.body);
          if (first) {
            out = Matrix(args[0].rows(), args[0].cols(), v.ring());
            first = false;
          }
          out.set(i, j, v);
        }
      if (first) throw std::logic_error("naive: empty apply");
      return out;
    }
    case ExprOp::PickAny: {
      Matrix a = naive_eval(e->args[0], env);
      Matrix out(a.rows(), a.cols(), a.ring());
      for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
          if (a.at(i, j) != zero(a.ring())) {
            out.set(i, j, a.at(i, j));
            break;
          }
      return out;
    }
    case ExprOp::Let: {
      NaiveEnv inner = env;
      inner.insert_or_assign(e->name, naive_eval(e->args[0], env));
      return naive_eval(e->args[1], inner);
    }
    case ExprOp::ForCanonical: {
      const Matrix& seed = env.at(e->name);  // tests pre-bind the vector
      std::size_t n = seed.rows();
      Ring vr = seed.ring();
      NaiveEnv cur = env;
      for (std::size_t i = 0; i < e->bindings.size(); ++i)
        cur.insert_or_assign(e->bindings[i].name, naive_eval(e->init(i), env));
      for (std::size_t it = 1; it <= n; ++it) {
        Matrix v(n, 1, vr);
        v.set(it - 1, 0, one(vr));
        NaiveEnv step = cur;
        step.insert_or_assign(e->name, std::move(v));
        std::vector<Matrix> next;
        for (const Binding& b : e->bindings) next.push_back(naive_eval(b.body, step));
        for (std::size_t i = 0; i < e->bindings.size(); ++i)
          cur.insert_or_assign(e->bindings[i].name, std::move(next[i]));
      }
      return cur.at(e->bindings[0].name);
    }
    case ExprOp::ForCounted: {
      std::size_t n = naive_eval(e->driver(), env).rows();
      NaiveEnv cur = env;
      for (std::size_t i = 0; i < e->bindings.size(); ++i)
        cur.insert_or_assign(e->bindings[i].name, naive_eval(e->init(i), env));
      for (std::size_t it = 1; it <= n; ++it) {
        std::vector<Matrix> next;
        for (const Binding& b : e->bindings) next.push_back(naive_eval(b.body, cur));
        for (std::size_t i = 0; i < e->bindings.size(); ++i)
          cur.insert_or_assign(e->bindings[i].name, std::move(next[i]));
      }
      return cur.at(e->bindings[0].name);
    }
  }
  throw std::logic_error("naive_eval: unknown op");
}

inline Matrix naive_eval_program(const Schema& schema, const Instance& inst,
                                 const Expr& e) {
  (void)schema;
  NaiveEnv env;
  for (const auto& [name, m] : inst.mats) env.insert_or_assign(name, m);
  return naive_eval(e, env);
}

}  // namespace matlang::testing
