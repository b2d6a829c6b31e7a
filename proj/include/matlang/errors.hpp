#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace matlang {

enum class EvalErrorKind {
  Arith,     // overflow, NaN, division by zero, value outside a carrier
  Dims,      // dimension mismatch discovered at runtime
  Ring,      // semiring mismatch discovered at runtime
  Unbound,   // reference to a variable missing from the environment
  Resource,  // element-count limit exceeded
  Instance,  // instance does not conform to the schema
};

std::string_view eval_error_kind_name(EvalErrorKind k);

// Runtime evaluation failure. Well-typed programs on conforming instances
// only ever raise Arith or Resource; the other kinds guard against misuse
// of the evaluator primitives themselves.
class EvalError : public std::runtime_error {
 public:
  EvalError(EvalErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  EvalErrorKind kind() const { return kind_; }

 private:
  EvalErrorKind kind_;
};

}  // namespace matlang
