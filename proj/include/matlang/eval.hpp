#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "matlang/ir.hpp"
#include "matlang/typecheck.hpp"

namespace matlang {

inline constexpr std::size_t kDefaultElementLimit = 1'000'000;

// Dense row-major matrix over a single ring. Construction zero-fills and
// enforces dims >= 1 and rows*cols <= the element limit.
class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols, Ring ring);
  Matrix(std::size_t rows, std::size_t cols, Ring ring, ScalarValue fill);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Ring ring() const { return ring_; }

  const ScalarValue& at(std::size_t r, std::size_t c) const;
  void set(std::size_t r, std::size_t c, ScalarValue v);  // ring-checked

 private:
  std::size_t rows_, cols_;
  Ring ring_;
  std::vector<ScalarValue> cells_;
};

using MatrixPtr = std::shared_ptr<const Matrix>;

bool matrix_equal(const Matrix& a, const Matrix& b);
// Entry-wise value_close; shape and ring must match exactly.
bool matrix_close(const Matrix& a, const Matrix& b, double rel_tol);
// Empty when the matrices agree (shape, ring, value_close per cell); otherwise
// a one-line description of the first difference in row-major order. rel_tol
// only matters on real-domain rings; integral rings compare exactly.
std::string matrix_mismatch(const Matrix& a, const Matrix& b, double rel_tol);

Matrix matrix_transpose(const Matrix& m);
Matrix matrix_product(const Matrix& a, const Matrix& b);

struct Instance {
  std::map<std::string, std::size_t> sizes;
  std::map<std::string, Matrix> mats;
};

// 1 for the literal dimension, otherwise the bound size; unbound symbols
// raise EvalError(Instance).
std::size_t instance_size(const Instance& inst, const SizeTerm& t);

// Every schema variable must be bound to a matrix of the instantiated shape
// and declared ring.
void check_instance(const Schema& schema, const Instance& inst);

struct EvalHooks {
  // Fired before each loop iteration, with the iteration number (1-based)
  // and the binding values that iteration observes (the inits on iteration
  // one). Applies to both loop forms.
  std::function<void(std::size_t iteration,
                     const std::vector<std::pair<std::string, MatrixPtr>>&)>
      on_loop_iter;
  // Fired after each single loop-body evaluation, with the binding's name.
  std::function<void(const std::string& binding)> on_body_eval;
};

struct EvalOptions {
  std::size_t element_limit = kDefaultElementLimit;
  const EvalHooks* hooks = nullptr;
};

// Type-checks e under the schema and evaluates it on the instance.
Matrix eval_program(const Schema& schema, const Instance& inst, const Expr& e);
Matrix eval_program(const Schema& schema, const Instance& inst, const Expr& e,
                    const EvalOptions& opts);

// B_ij = A_ij if no earlier entry in row i is nonzero, else zero.
Matrix pick_any(const Matrix& a);

// Entry-wise application; arguments must agree in shape and match the
// parameter rings.
Matrix eval_pointwise(const PointwiseFn& fn, const std::vector<Matrix>& args);

ScalarValue eval_scalar(const std::map<std::string, ScalarValue>& env,
                        const ScalarPtr& s);

// k-th canonical basis column vector of length n (1-based k): one(ring) at
// position k, zero(ring) elsewhere.
Matrix canonical_vector(std::size_t n, std::size_t k, Ring ring);

Matrix encode_matrix(const Matrix& m);           // entry-wise enc into real
Matrix decode_matrix(Ring r, const Matrix& m);   // entry-wise retraction

}  // namespace matlang
