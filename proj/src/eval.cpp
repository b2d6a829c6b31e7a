#include "matlang/eval.hpp"

#include <stdexcept>

namespace matlang {

namespace {

[[noreturn]] void err(EvalErrorKind k, const std::string& msg) {
  throw EvalError(k, msg);
}

void check_shape(std::size_t rows, std::size_t cols, std::size_t limit) {
  if (rows == 0 || cols == 0)
    err(EvalErrorKind::Dims, "matrix dimensions must be at least 1");
  if (rows > limit / cols)
    err(EvalErrorKind::Resource,
        "matrix of " + std::to_string(rows) + " x " + std::to_string(cols) +
            " exceeds the element limit");
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, Ring ring)
    : Matrix(rows, cols, ring, zero(ring)) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, Ring ring, ScalarValue fill)
    : rows_(rows), cols_(cols), ring_(ring) {
  check_shape(rows, cols, kDefaultElementLimit);
  if (fill.ring() != ring)
    err(EvalErrorKind::Ring, "fill value over the wrong ring");
  cells_.assign(rows_ * cols_, fill);
}

const ScalarValue& Matrix::at(std::size_t r, std::size_t c) const {
  if (r >= rows_ || c >= cols_)
    err(EvalErrorKind::Dims, "matrix index out of range");
  return cells_[r * cols_ + c];
}

void Matrix::set(std::size_t r, std::size_t c, ScalarValue v) {
  if (r >= rows_ || c >= cols_)
    err(EvalErrorKind::Dims, "matrix index out of range");
  if (v.ring() != ring_)
    err(EvalErrorKind::Ring, "entry over the wrong ring");
  cells_[r * cols_ + c] = std::move(v);
}

bool matrix_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.ring() != b.ring())
    return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (a.at(i, j) != b.at(i, j)) return false;
  return true;
}

bool matrix_close(const Matrix& a, const Matrix& b, double rel_tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.ring() != b.ring())
    return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (!value_close(a.at(i, j), b.at(i, j), rel_tol)) return false;
  return true;
}

std::string matrix_mismatch(const Matrix& a, const Matrix& b, double rel_tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    return "shape " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
           " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols());
  if (a.ring() != b.ring())
    return "ring " + std::string(ring_name(a.ring())) + " vs " +
           std::string(ring_name(b.ring()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const ScalarValue& x = a.at(i, j);
      const ScalarValue& y = b.at(i, j);
      if (!value_close(x, y, rel_tol))
        return "cell (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
               "): " + x.token() + " vs " + y.token();
    }
  return {};
}

Matrix matrix_transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows(), m.ring());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out.set(j, i, m.at(i, j));
  return out;
}

Matrix matrix_product(const Matrix& a, const Matrix& b) {
  if (a.ring() != b.ring())
    err(EvalErrorKind::Ring, "matmul over different rings");
  if (a.cols() != b.rows())
    err(EvalErrorKind::Dims, "matmul inner dims: " + std::to_string(a.cols()) +
                                 " vs " + std::to_string(b.rows()));
  Matrix out(a.rows(), b.cols(), a.ring());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      ScalarValue acc = zero(a.ring());
      for (std::size_t k = 0; k < a.cols(); ++k)
        acc = sr_add(acc, sr_mul(a.at(i, k), b.at(k, j)));
      out.set(i, j, std::move(acc));
    }
  return out;
}

std::size_t instance_size(const Instance& inst, const SizeTerm& t) {
  if (t.is_one()) return 1;
  auto it = inst.sizes.find(t.name());
  if (it == inst.sizes.end())
    err(EvalErrorKind::Instance, "size symbol " + t.name() + " is not bound");
  if (it->second == 0)
    err(EvalErrorKind::Instance, "size symbol " + t.name() + " must be >= 1");
  return it->second;
}

void check_instance(const Schema& schema, const Instance& inst) {
  for (const auto& [name, ty] : schema) {
    auto it = inst.mats.find(name);
    if (it == inst.mats.end())
      err(EvalErrorKind::Instance, "no matrix bound for " + name);
    const Matrix& m = it->second;
    std::size_t r = instance_size(inst, ty.rows);
    std::size_t c = instance_size(inst, ty.cols);
    if (m.rows() != r || m.cols() != c)
      err(EvalErrorKind::Instance,
          name + " is " + std::to_string(m.rows()) + " x " +
              std::to_string(m.cols()) + " but the schema needs " +
              std::to_string(r) + " x " + std::to_string(c));
    if (m.ring() != ty.ring)
      err(EvalErrorKind::Instance,
          name + " is over " + std::string(ring_name(m.ring())) +
              " but the schema needs " + std::string(ring_name(ty.ring)));
  }
}

Matrix canonical_vector(std::size_t n, std::size_t k, Ring ring) {
  if (k < 1 || k > n)
    err(EvalErrorKind::Dims, "canonical vector index out of range");
  Matrix out(n, 1, ring);
  out.set(k - 1, 0, one(ring));
  return out;
}

Matrix pick_any(const Matrix& a) {
  Matrix out(a.rows(), a.cols(), a.ring());
  ScalarValue z = zero(a.ring());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (a.at(i, j) == z) continue;
      out.set(i, j, a.at(i, j));
      break;  // only the first nonzero of the row survives
    }
  return out;
}

ScalarValue eval_scalar(const std::map<std::string, ScalarValue>& env,
                        const ScalarPtr& s) {
  switch (s->op) {
    case ScalarOp::Param: {
      auto it = env.find(s->param);
      if (it == env.end())
        err(EvalErrorKind::Unbound, "unbound parameter " + s->param);
      return it->second;
    }
    case ScalarOp::Lit:
      return *s->lit;
    case ScalarOp::Add:
      return sr_add(eval_scalar(env, s->args[0]), eval_scalar(env, s->args[1]));
    case ScalarOp::Mul:
      return sr_mul(eval_scalar(env, s->args[0]), eval_scalar(env, s->args[1]));
    case ScalarOp::Sub:
      return sr_sub(eval_scalar(env, s->args[0]), eval_scalar(env, s->args[1]));
    case ScalarOp::Div:
      return sr_div(eval_scalar(env, s->args[0]), eval_scalar(env, s->args[1]));
    case ScalarOp::Eq:
      return sr_eq(eval_scalar(env, s->args[0]), eval_scalar(env, s->args[1]));
    case ScalarOp::Cast: {
      ScalarValue v = eval_scalar(env, s->args[0]);
      return cast_value(v.ring(), s->ring, v);
    }
    case ScalarOp::Cond: {
      ScalarValue w = eval_scalar(env, s->args[0]);
      ScalarValue x = eval_scalar(env, s->args[1]);
      if (w.ring() != x.ring())
        err(EvalErrorKind::Ring, "cond comparands over different rings");
      return w == x ? eval_scalar(env, s->args[2])
                    : eval_scalar(env, s->args[3]);
    }
    case ScalarOp::Enc:
      return enc_value(s->ring, eval_scalar(env, s->args[0]));
    case ScalarOp::Dec:
      return dec_value(s->ring, eval_scalar(env, s->args[0]));
  }
  err(EvalErrorKind::Unbound, "unknown scalar op");
}

Matrix eval_pointwise(const PointwiseFn& fn, const std::vector<Matrix>& args) {
  if (args.empty() || args.size() != fn.params.size())
    err(EvalErrorKind::Dims, "pointwise argument count mismatch");
  const Matrix& first = args[0];
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i].rows() != first.rows() || args[i].cols() != first.cols())
      err(EvalErrorKind::Dims, "pointwise arguments differ in shape");
    if (args[i].ring() != fn.params[i].second)
      err(EvalErrorKind::Ring, "pointwise argument over the wrong ring");
  }
  std::map<std::string, Ring> param_rings;
  for (const auto& [n, r] : fn.params) param_rings[n] = r;
  Ring out_ring = check_scalar(param_rings, fn.body);

  Matrix out(first.rows(), first.cols(), out_ring);
  std::map<std::string, ScalarValue> cell;
  for (std::size_t i = 0; i < first.rows(); ++i)
    for (std::size_t j = 0; j < first.cols(); ++j) {
      cell.clear();
      for (std::size_t k = 0; k < args.size(); ++k)
        cell.emplace(fn.params[k].first, args[k].at(i, j));
      out.set(i, j, eval_scalar(cell, fn.body));
    }
  return out;
}

Matrix encode_matrix(const Matrix& m) {
  Matrix out(m.rows(), m.cols(), Ring::Real);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out.set(i, j, enc_value(m.ring(), m.at(i, j)));
  return out;
}

Matrix decode_matrix(Ring r, const Matrix& m) {
  if (m.ring() != Ring::Real)
    err(EvalErrorKind::Ring, "decode of a non-real matrix");
  Matrix out(m.rows(), m.cols(), r);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out.set(i, j, dec_value(r, m.at(i, j)));
  return out;
}

namespace {

struct Evaluator {
  const Instance& inst;
  const TypedProgram& types;
  const EvalOptions& opts;
  std::map<std::string, MatrixPtr> base;  // instance matrices, shared once
  std::vector<std::pair<std::string, MatrixPtr>> env;

  MatrixPtr lookup(const std::string& name) const {
    for (auto it = env.rbegin(); it != env.rend(); ++it)
      if (it->first == name) return it->second;
    auto it = base.find(name);
    if (it != base.end()) return it->second;
    err(EvalErrorKind::Unbound, "unbound variable " + name);
  }

  void check_limit(std::size_t rows, std::size_t cols) const {
    check_shape(rows, cols, opts.element_limit);
  }

  MatrixPtr share(Matrix m) const {
    return std::make_shared<Matrix>(std::move(m));
  }

  MatrixPtr eval(const Expr& e) {
    switch (e->op) {
      case ExprOp::Var:
        return lookup(e->name);
      case ExprOp::Transpose:
        return share(matrix_transpose(*eval(e->args[0])));
      case ExprOp::Ones: {
        MatrixPtr m = eval(e->args[0]);
        return share(Matrix(m->rows(), 1, m->ring(), one(m->ring())));
      }
      case ExprOp::Diag: {
        MatrixPtr m = eval(e->args[0]);
        if (m->cols() != 1)
          err(EvalErrorKind::Dims, "diag of a non-column");
        check_limit(m->rows(), m->rows());
        Matrix out(m->rows(), m->rows(), m->ring());
        for (std::size_t i = 0; i < m->rows(); ++i)
          out.set(i, i, m->at(i, 0));
        return share(std::move(out));
      }
      case ExprOp::MatMul: {
        MatrixPtr a = eval(e->args[0]);
        MatrixPtr b = eval(e->args[1]);
        check_limit(a->rows(), b->cols());
        return share(matrix_product(*a, *b));
      }
      case ExprOp::Apply: {
        std::vector<Matrix> args;
        args.reserve(e->args.size());
        for (const auto& a : e->args) args.push_back(*eval(a));
        return share(eval_pointwise(*e->fn, args));
      }
      case ExprOp::PickAny:
        return share(pick_any(*eval(e->args[0])));
      case ExprOp::Let: {
        env.emplace_back(e->name, eval(e->args[0]));
        MatrixPtr out = eval(e->args[1]);
        env.pop_back();
        return out;
      }
      case ExprOp::ForCanonical: {
        const LoopInfo& li = types.canonical_loops.at(e.get());
        std::size_t n = instance_size(inst, li.count);
        return run_loop(e, n, &li);
      }
      case ExprOp::ForCounted: {
        MatrixPtr driver = eval(e->driver());
        if (driver->cols() != 1)
          err(EvalErrorKind::Dims, "loop driver is not a column vector");
        return run_loop(e, driver->rows(), nullptr);
      }
    }
    err(EvalErrorKind::Unbound, "unknown op");
  }

  // Shared iteration engine. All bodies of an iteration are evaluated
  // against the previous iteration's bindings before any are rebound;
  // canonical loops additionally see v as the i-th basis vector.
  MatrixPtr run_loop(const Expr& e, std::size_t n, const LoopInfo* li) {
    std::size_t mark = env.size();
    for (std::size_t i = 0; i < e->bindings.size(); ++i)
      env.emplace_back(e->bindings[i].name, eval(e->init(i)));
    std::size_t v_slot = env.size();
    if (li)
      env.emplace_back(e->name, share(canonical_vector(n, 1, li->v_ring)));

    for (std::size_t iter = 1; iter <= n; ++iter) {
      if (li)
        env[v_slot].second = share(canonical_vector(n, iter, li->v_ring));
      if (opts.hooks && opts.hooks->on_loop_iter) {
        std::vector<std::pair<std::string, MatrixPtr>> snapshot(
            env.begin() + mark, env.begin() + mark + e->bindings.size());
        opts.hooks->on_loop_iter(iter, snapshot);
      }
      std::vector<MatrixPtr> next(e->bindings.size());
      for (std::size_t i = 0; i < e->bindings.size(); ++i) {
        next[i] = eval(e->bindings[i].body);
        if (opts.hooks && opts.hooks->on_body_eval)
          opts.hooks->on_body_eval(e->bindings[i].name);
      }
      for (std::size_t i = 0; i < e->bindings.size(); ++i)
        env[mark + i].second = std::move(next[i]);
    }

    MatrixPtr out = env[mark].second;
    env.resize(mark);
    return out;
  }
};

}  // namespace

Matrix eval_program(const Schema& schema, const Instance& inst, const Expr& e,
                    const EvalOptions& opts) {
  TypedProgram types = infer_program(schema, e);
  check_instance(schema, inst);
  Evaluator ev{inst, types, opts, {}, {}};
  for (const auto& [name, m] : inst.mats)
    ev.base.emplace(name, std::make_shared<Matrix>(m));
  return *ev.eval(e);
}

Matrix eval_program(const Schema& schema, const Instance& inst,
                    const Expr& e) {
  EvalOptions opts;
  return eval_program(schema, inst, e, opts);
}

}  // namespace matlang
