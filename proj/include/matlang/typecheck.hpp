#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "matlang/ir.hpp"

namespace matlang {

struct TypeErrorInfo {
  std::string path;      // node path from the program body
  std::string rule;      // short rule name, e.g. "matmul inner dims"
  std::string expected;
  std::string found;
  std::string str() const;
};

class TypeCheckError : public std::runtime_error {
 public:
  explicit TypeCheckError(TypeErrorInfo info)
      : std::runtime_error(info.str()), info_(std::move(info)) {}
  const TypeErrorInfo& info() const { return info_; }

 private:
  TypeErrorInfo info_;
};

// Facts the evaluator needs about one canonical loop: how many iterations
// (a size term resolved against the instance) and the ring of the canonical
// vectors.
struct LoopInfo {
  SizeTerm count;
  Ring v_ring = Ring::Bool;
};

struct TypedProgram {
  MatrixType type;
  // Annotations keyed by node identity. Subtree sharing within one binding
  // scope is fine; the same node must not be reused where it would resolve
  // to a different type.
  std::map<const ExprNode*, MatrixType> node_types;
  std::map<const ExprNode*, LoopInfo> canonical_loops;
};

TypedProgram infer_program(const Schema& schema, const Expr& e);
MatrixType infer_type(const Schema& schema, const Expr& e);

// Ring of a scalar expression under a parameter environment.
Ring check_scalar(const std::map<std::string, Ring>& params,
                  const ScalarPtr& s);

// Environment a loop body is checked under: the outer schema, each binding
// at its init's type, and (for canonical loops) the vector variable.
Schema loop_step_schema(const Schema& outer, const Expr& loop_node);

}  // namespace matlang
