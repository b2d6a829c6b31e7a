#include "matlang/semiring.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <limits>

namespace matlang {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwo63 = 9223372036854775808.0;  // 2^63, exact in double

[[noreturn]] void arith_error(const std::string& msg) {
  throw EvalError(EvalErrorKind::Arith, msg);
}

[[noreturn]] void ring_error(const std::string& msg) {
  throw EvalError(EvalErrorKind::Ring, msg);
}

void require_same_ring(const ScalarValue& a, const ScalarValue& b,
                       const char* op) {
  if (a.ring() != b.ring())
    ring_error(std::string(op) + ": operands over " +
               std::string(ring_name(a.ring())) + " and " +
               std::string(ring_name(b.ring())));
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) arith_error("integer overflow in +");
  return out;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_sub_overflow(a, b, &out)) arith_error("integer overflow in -");
  return out;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out)) arith_error("integer overflow in *");
  return out;
}

// A NaN result always errors; a non-finite result from finite operands is
// an overflow and errors too.
double guard_real(double x, bool operands_finite, const char* op) {
  if (std::isnan(x)) arith_error(std::string("not a number from ") + op);
  if (operands_finite && std::isinf(x))
    arith_error(std::string("real overflow in ") + op);
  return x;
}

}  // namespace

std::string_view eval_error_kind_name(EvalErrorKind k) {
  switch (k) {
    case EvalErrorKind::Arith: return "arith";
    case EvalErrorKind::Dims: return "dims";
    case EvalErrorKind::Ring: return "ring";
    case EvalErrorKind::Unbound: return "unbound";
    case EvalErrorKind::Resource: return "resource";
    case EvalErrorKind::Instance: return "instance";
  }
  return "?";
}

std::string_view ring_name(Ring r) {
  switch (r) {
    case Ring::Bool: return "bool";
    case Ring::Int: return "int";
    case Ring::Real: return "real";
    case Ring::IntMinPlus: return "int_min_plus";
    case Ring::RealMinPlus: return "real_min_plus";
    case Ring::IntMaxPlus: return "int_max_plus";
    case Ring::RealMaxPlus: return "real_max_plus";
  }
  return "?";
}

std::optional<Ring> ring_from_name(std::string_view name) {
  for (Ring r : kRings)
    if (ring_name(r) == name) return r;
  return std::nullopt;
}

bool is_int_domain(Ring r) {
  return r == Ring::Int || r == Ring::IntMinPlus || r == Ring::IntMaxPlus;
}

bool is_real_domain(Ring r) {
  return r == Ring::Real || r == Ring::RealMinPlus || r == Ring::RealMaxPlus;
}

bool is_min_plus(Ring r) {
  return r == Ring::IntMinPlus || r == Ring::RealMinPlus;
}

bool is_max_plus(Ring r) {
  return r == Ring::IntMaxPlus || r == Ring::RealMaxPlus;
}

bool is_tropical(Ring r) { return is_min_plus(r) || is_max_plus(r); }

ScalarValue ScalarValue::of_bool(bool b) {
  ScalarValue v;
  v.ring_ = Ring::Bool;
  v.b_ = b;
  return v;
}

ScalarValue ScalarValue::of_int(Ring r, std::int64_t x) {
  if (!is_int_domain(r))
    ring_error("integer value over " + std::string(ring_name(r)));
  ScalarValue v;
  v.ring_ = r;
  v.i_ = x;
  return v;
}

ScalarValue ScalarValue::of_real(Ring r, double x) {
  if (!is_real_domain(r))
    ring_error("real value over " + std::string(ring_name(r)));
  if (std::isnan(x)) arith_error("not a number is not representable");
  if (std::isinf(x)) {
    if (r == Ring::RealMinPlus && x < 0)
      arith_error("-inf outside the min-plus carrier");
    if (r == Ring::RealMaxPlus && x > 0)
      arith_error("inf outside the max-plus carrier");
  }
  if (x == 0.0) x = 0.0;  // normalize -0.0
  ScalarValue v;
  v.ring_ = r;
  v.d_ = x;
  return v;
}

ScalarValue ScalarValue::pos_inf(Ring r) {
  if (r == Ring::IntMinPlus) {
    ScalarValue v;
    v.ring_ = r;
    v.inf_ = +1;
    return v;
  }
  if (r == Ring::RealMinPlus || r == Ring::Real) return of_real(r, kInf);
  ring_error("inf outside the " + std::string(ring_name(r)) + " carrier");
}

ScalarValue ScalarValue::neg_inf(Ring r) {
  if (r == Ring::IntMaxPlus) {
    ScalarValue v;
    v.ring_ = r;
    v.inf_ = -1;
    return v;
  }
  if (r == Ring::RealMaxPlus || r == Ring::Real) return of_real(r, -kInf);
  ring_error("-inf outside the " + std::string(ring_name(r)) + " carrier");
}

bool ScalarValue::is_pos_inf() const {
  if (is_int_domain(ring_)) return inf_ > 0;
  if (is_real_domain(ring_)) return std::isinf(d_) && d_ > 0;
  return false;
}

bool ScalarValue::is_neg_inf() const {
  if (is_int_domain(ring_)) return inf_ < 0;
  if (is_real_domain(ring_)) return std::isinf(d_) && d_ < 0;
  return false;
}

bool ScalarValue::is_zero() const { return *this == zero(ring_); }

bool ScalarValue::bool_value() const {
  assert(ring_ == Ring::Bool);
  return b_;
}

std::int64_t ScalarValue::int_value() const {
  assert(is_int_domain(ring_) && inf_ == 0);
  return i_;
}

double ScalarValue::real_value() const {
  assert(is_real_domain(ring_));
  return d_;
}

bool operator==(const ScalarValue& a, const ScalarValue& b) {
  if (a.ring_ != b.ring_) return false;
  if (a.ring_ == Ring::Bool) return a.b_ == b.b_;
  if (is_int_domain(a.ring_))
    return a.inf_ == b.inf_ && (a.inf_ != 0 || a.i_ == b.i_);
  return a.d_ == b.d_;  // -0.0 normalized at construction
}

std::string ScalarValue::token() const {
  if (ring_ == Ring::Bool) return b_ ? "true" : "false";
  if (is_pos_inf()) return "inf";
  if (is_neg_inf()) return "-inf";
  if (is_int_domain(ring_)) return std::to_string(i_);
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, d_);
  return std::string(buf, res.ptr);
}

ScalarValue zero(Ring r) {
  switch (r) {
    case Ring::Bool: return ScalarValue::of_bool(false);
    case Ring::Int: return ScalarValue::of_int(r, 0);
    case Ring::Real: return ScalarValue::of_real(r, 0.0);
    case Ring::IntMinPlus:
    case Ring::RealMinPlus: return ScalarValue::pos_inf(r);
    case Ring::IntMaxPlus:
    case Ring::RealMaxPlus: return ScalarValue::neg_inf(r);
  }
  ring_error("unknown ring");
}

ScalarValue one(Ring r) {
  switch (r) {
    case Ring::Bool: return ScalarValue::of_bool(true);
    case Ring::Int: return ScalarValue::of_int(r, 1);
    case Ring::Real: return ScalarValue::of_real(r, 1.0);
    case Ring::IntMinPlus:
    case Ring::IntMaxPlus: return ScalarValue::of_int(r, 0);
    case Ring::RealMinPlus:
    case Ring::RealMaxPlus: return ScalarValue::of_real(r, 0.0);
  }
  ring_error("unknown ring");
}

ScalarValue sr_add(const ScalarValue& a, const ScalarValue& b) {
  require_same_ring(a, b, "add");
  Ring r = a.ring();
  switch (r) {
    case Ring::Bool:
      return ScalarValue::of_bool(a.bool_value() || b.bool_value());
    case Ring::Int:
      return ScalarValue::of_int(r, checked_add(a.int_value(), b.int_value()));
    case Ring::Real: {
      double x = a.real_value(), y = b.real_value();
      bool fin = std::isfinite(x) && std::isfinite(y);
      return ScalarValue::of_real(r, guard_real(x + y, fin, "+"));
    }
    case Ring::IntMinPlus:
      if (a.is_pos_inf()) return b;
      if (b.is_pos_inf()) return a;
      return ScalarValue::of_int(r, std::min(a.int_value(), b.int_value()));
    case Ring::RealMinPlus:
      return ScalarValue::of_real(r, std::min(a.real_value(), b.real_value()));
    case Ring::IntMaxPlus:
      if (a.is_neg_inf()) return b;
      if (b.is_neg_inf()) return a;
      return ScalarValue::of_int(r, std::max(a.int_value(), b.int_value()));
    case Ring::RealMaxPlus:
      return ScalarValue::of_real(r, std::max(a.real_value(), b.real_value()));
  }
  ring_error("unknown ring");
}

ScalarValue sr_mul(const ScalarValue& a, const ScalarValue& b) {
  require_same_ring(a, b, "mul");
  Ring r = a.ring();
  switch (r) {
    case Ring::Bool:
      return ScalarValue::of_bool(a.bool_value() && b.bool_value());
    case Ring::Int:
      return ScalarValue::of_int(r, checked_mul(a.int_value(), b.int_value()));
    case Ring::Real: {
      double x = a.real_value(), y = b.real_value();
      if (x == 0.0 || y == 0.0) return ScalarValue::of_real(r, 0.0);
      bool fin = std::isfinite(x) && std::isfinite(y);
      return ScalarValue::of_real(r, guard_real(x * y, fin, "*"));
    }
    case Ring::IntMinPlus:
      if (a.is_pos_inf() || b.is_pos_inf()) return ScalarValue::pos_inf(r);
      return ScalarValue::of_int(r, checked_add(a.int_value(), b.int_value()));
    case Ring::RealMinPlus: {
      if (a.is_pos_inf() || b.is_pos_inf()) return ScalarValue::pos_inf(r);
      double s = guard_real(a.real_value() + b.real_value(), true, "min-plus *");
      return ScalarValue::of_real(r, s);
    }
    case Ring::IntMaxPlus:
      if (a.is_neg_inf() || b.is_neg_inf()) return ScalarValue::neg_inf(r);
      return ScalarValue::of_int(r, checked_add(a.int_value(), b.int_value()));
    case Ring::RealMaxPlus: {
      if (a.is_neg_inf() || b.is_neg_inf()) return ScalarValue::neg_inf(r);
      double s = guard_real(a.real_value() + b.real_value(), true, "max-plus *");
      return ScalarValue::of_real(r, s);
    }
  }
  ring_error("unknown ring");
}

ScalarValue sr_sub(const ScalarValue& a, const ScalarValue& b) {
  require_same_ring(a, b, "sub");
  Ring r = a.ring();
  if (r == Ring::Int)
    return ScalarValue::of_int(r, checked_sub(a.int_value(), b.int_value()));
  if (r == Ring::Real) {
    double x = a.real_value(), y = b.real_value();
    bool fin = std::isfinite(x) && std::isfinite(y);
    return ScalarValue::of_real(r, guard_real(x - y, fin, "-"));
  }
  ring_error("sub over " + std::string(ring_name(r)));
}

ScalarValue sr_div(const ScalarValue& a, const ScalarValue& b) {
  require_same_ring(a, b, "div");
  if (a.ring() != Ring::Real)
    ring_error("div over " + std::string(ring_name(a.ring())));
  double x = a.real_value(), y = b.real_value();
  if (y == 0.0) arith_error("division by zero");
  bool fin = std::isfinite(x) && std::isfinite(y);
  return ScalarValue::of_real(Ring::Real, guard_real(x / y, fin, "/"));
}

ScalarValue sr_eq(const ScalarValue& a, const ScalarValue& b) {
  require_same_ring(a, b, "eq");
  return ScalarValue::of_bool(a == b);
}

ScalarValue cast_value(Ring src, Ring dst, const ScalarValue& v) {
  if (v.ring() != src) ring_error("cast: value not over the source ring");
  if (src == dst) return v;
  if (v.is_zero()) return zero(dst);
  if (dst == Ring::Bool) return one(Ring::Bool);
  if (src == Ring::Bool) return one(dst);
  if (is_int_domain(src) && is_int_domain(dst))
    return ScalarValue::of_int(dst, v.int_value());
  if (is_real_domain(src) && is_real_domain(dst)) {
    if (v.is_pos_inf()) return ScalarValue::pos_inf(dst);
    if (v.is_neg_inf()) return ScalarValue::neg_inf(dst);
    return ScalarValue::of_real(dst, v.real_value());
  }
  if (is_int_domain(src))
    return ScalarValue::of_real(dst, static_cast<double>(v.int_value()));
  // real domain -> int domain: floor
  if (v.is_pos_inf()) {
    if (dst == Ring::IntMinPlus) return ScalarValue::pos_inf(dst);
    arith_error("floor of inf");
  }
  if (v.is_neg_inf()) {
    if (dst == Ring::IntMaxPlus) return ScalarValue::neg_inf(dst);
    arith_error("floor of -inf");
  }
  double f = std::floor(v.real_value());
  if (!(f >= -kTwo63 && f < kTwo63)) arith_error("floor outside 64-bit range");
  return ScalarValue::of_int(dst, static_cast<std::int64_t>(f));
}

ScalarValue enc_value(Ring r, const ScalarValue& v) {
  if (v.ring() != r) ring_error("enc: value not over the stated ring");
  switch (r) {
    case Ring::Bool:
      return ScalarValue::of_real(Ring::Real, v.bool_value() ? 1.0 : 0.0);
    case Ring::Int:
      return ScalarValue::of_real(Ring::Real,
                                  static_cast<double>(v.int_value()));
    case Ring::Real: return v;
    case Ring::IntMinPlus:
      if (v.is_pos_inf()) return ScalarValue::of_real(Ring::Real, 0.0);
      if (v.int_value() == 0) return ScalarValue::pos_inf(Ring::Real);
      return ScalarValue::of_real(Ring::Real,
                                  static_cast<double>(v.int_value()));
    case Ring::RealMinPlus:
      if (v.is_pos_inf()) return ScalarValue::of_real(Ring::Real, 0.0);
      if (v.real_value() == 0.0) return ScalarValue::pos_inf(Ring::Real);
      return ScalarValue::of_real(Ring::Real, v.real_value());
    case Ring::IntMaxPlus:
      if (v.is_neg_inf()) return ScalarValue::of_real(Ring::Real, 0.0);
      if (v.int_value() == 0) return ScalarValue::neg_inf(Ring::Real);
      return ScalarValue::of_real(Ring::Real,
                                  static_cast<double>(v.int_value()));
    case Ring::RealMaxPlus:
      if (v.is_neg_inf()) return ScalarValue::of_real(Ring::Real, 0.0);
      if (v.real_value() == 0.0) return ScalarValue::neg_inf(Ring::Real);
      return ScalarValue::of_real(Ring::Real, v.real_value());
  }
  ring_error("unknown ring");
}

ScalarValue dec_value(Ring r, const ScalarValue& w) {
  if (w.ring() != Ring::Real) ring_error("dec: value not over real");
  double x = w.real_value();
  bool integral = std::isfinite(x) && std::floor(x) == x && x >= -kTwo63 &&
                  x < kTwo63;
  switch (r) {
    case Ring::Bool: return ScalarValue::of_bool(x == 1.0);
    case Ring::Int:
      if (!integral) return zero(r);
      return ScalarValue::of_int(r, static_cast<std::int64_t>(x));
    case Ring::Real:
      if (!std::isfinite(x)) return zero(r);
      return w;
    case Ring::IntMinPlus:
      if (x == 0.0) return ScalarValue::pos_inf(r);
      if (w.is_pos_inf()) return ScalarValue::of_int(r, 0);
      if (!integral) return zero(r);
      return ScalarValue::of_int(r, static_cast<std::int64_t>(x));
    case Ring::RealMinPlus:
      if (x == 0.0) return ScalarValue::pos_inf(r);
      if (w.is_pos_inf()) return ScalarValue::of_real(r, 0.0);
      if (!std::isfinite(x)) return zero(r);
      return ScalarValue::of_real(r, x);
    case Ring::IntMaxPlus:
      if (x == 0.0) return ScalarValue::neg_inf(r);
      if (w.is_neg_inf()) return ScalarValue::of_int(r, 0);
      if (!integral) return zero(r);
      return ScalarValue::of_int(r, static_cast<std::int64_t>(x));
    case Ring::RealMaxPlus:
      if (x == 0.0) return ScalarValue::neg_inf(r);
      if (w.is_neg_inf()) return ScalarValue::of_real(r, 0.0);
      if (!std::isfinite(x)) return zero(r);
      return ScalarValue::of_real(r, x);
  }
  ring_error("unknown ring");
}

bool value_close(const ScalarValue& a, const ScalarValue& b, double rel_tol) {
  if (a.ring() != b.ring()) return false;
  if (a == b) return true;
  if (!is_real_domain(a.ring())) return false;
  double x = a.real_value(), y = b.real_value();
  if (!std::isfinite(x) || !std::isfinite(y)) return false;
  return std::abs(x - y) <= rel_tol * std::max(std::abs(x), std::abs(y));
}

}  // namespace matlang
