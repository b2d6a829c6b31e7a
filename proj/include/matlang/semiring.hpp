#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "matlang/errors.hpp"

namespace matlang {

enum class Ring {
  Bool,
  Int,
  Real,
  IntMinPlus,
  RealMinPlus,
  IntMaxPlus,
  RealMaxPlus,
};

inline constexpr Ring kRings[] = {
    Ring::Bool,        Ring::Int,        Ring::Real,        Ring::IntMinPlus,
    Ring::RealMinPlus, Ring::IntMaxPlus, Ring::RealMaxPlus,
};

std::string_view ring_name(Ring r);
std::optional<Ring> ring_from_name(std::string_view name);

bool is_int_domain(Ring r);   // int, int_min_plus, int_max_plus
bool is_real_domain(Ring r);  // real, real_min_plus, real_max_plus
bool is_min_plus(Ring r);
bool is_max_plus(Ring r);
bool is_tropical(Ring r);

// A value in the carrier of one of the seven rings.
//
// Carriers: min-plus rings admit +inf (their additive identity), max-plus
// rings admit -inf, bool/int/real are otherwise finite, and NaN is never
// representable anywhere. As the one extension, plain `real` values may
// carry +/-inf: the encoding of the other rings into the reals uses the
// infinities as sentinels, and multiplication over the reals is absorbing
// in 0 precisely so that those sentinels cannot produce NaN.
class ScalarValue {
 public:
  ScalarValue() = default;  // bool false

  static ScalarValue of_bool(bool b);
  static ScalarValue of_int(Ring r, std::int64_t v);   // int-domain rings
  static ScalarValue of_real(Ring r, double v);        // real-domain rings
  static ScalarValue pos_inf(Ring r);                  // min-plus rings, real
  static ScalarValue neg_inf(Ring r);                  // max-plus rings, real

  Ring ring() const { return ring_; }
  bool is_pos_inf() const;
  bool is_neg_inf() const;
  bool is_finite() const { return !is_pos_inf() && !is_neg_inf(); }
  bool is_zero() const;  // equals the additive identity of ring()

  bool bool_value() const;         // ring bool only
  std::int64_t int_value() const;  // finite int-domain values only
  double real_value() const;       // real-domain values, infinities included

  friend bool operator==(const ScalarValue& a, const ScalarValue& b);
  friend bool operator!=(const ScalarValue& a, const ScalarValue& b) {
    return !(a == b);
  }

  // Canonical text form: true|false, a decimal integer, a shortest
  // round-trip decimal, inf, or -inf.
  std::string token() const;

 private:
  Ring ring_ = Ring::Bool;
  bool b_ = false;
  std::int64_t i_ = 0;
  double d_ = 0.0;
  signed char inf_ = 0;  // int-domain tropical infinity: +1 or -1
};

ScalarValue zero(Ring r);
ScalarValue one(Ring r);

// Semiring addition and multiplication. Checked: 64-bit overflow, real
// overflow from finite operands, and any NaN raise EvalError(Arith).
ScalarValue sr_add(const ScalarValue& a, const ScalarValue& b);
ScalarValue sr_mul(const ScalarValue& a, const ScalarValue& b);

ScalarValue sr_sub(const ScalarValue& a, const ScalarValue& b);  // int or real
ScalarValue sr_div(const ScalarValue& a, const ScalarValue& b);  // real only
ScalarValue sr_eq(const ScalarValue& a, const ScalarValue& b);   // -> bool

// Cast v from ring src to dst. Rules, in order: identity; the additive
// identity maps to the additive identity; anything else to bool is true;
// bool true becomes the multiplicative identity; within the same value
// domain the payload is preserved; int payloads widen to real; real
// payloads floor to int (EvalError(Arith) outside 64-bit range).
ScalarValue cast_value(Ring src, Ring dst, const ScalarValue& v);

// Injective embedding of ring r into the reals and its retraction.
// The embedding swaps a tropical carrier's infinity with its finite 0 so
// the additive identity of every ring lands on 0.0; dec maps real values
// outside the image back to zero(r).
ScalarValue enc_value(Ring r, const ScalarValue& v);
ScalarValue dec_value(Ring r, const ScalarValue& w);

// Comparison used by the differential suites: exact for bool and the
// int-domain rings, relative tolerance for the real-domain rings (equal
// infinities compare equal).
bool value_close(const ScalarValue& a, const ScalarValue& b, double rel_tol);

}  // namespace matlang
