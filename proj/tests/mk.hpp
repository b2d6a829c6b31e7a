#pragma once

// Tiny literal matrix builders for tests.

#include <cstdint>
#include <initializer_list>

#include "matlang/eval.hpp"
#include "matlang/semiring.hpp"

namespace matlang::testing {

inline Matrix mk_int(Ring r, std::initializer_list<std::initializer_list<std::int64_t>> rows) {
  Matrix m(rows.size(), rows.begin()->size(), r);
  std::size_t i = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (std::int64_t v : row) m.set(i, j++, ScalarValue::of_int(r, v));
    ++i;
  }
  return m;
}

inline Matrix mk_real(Ring r, std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size(), r);
  std::size_t i = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (double v : row) m.set(i, j++, ScalarValue::of_real(r, v));
    ++i;
  }
  return m;
}

// Fills inst.sizes by unifying schema dimension symbols against the bound
// matrices (explicit entries win). Tests bind consistent instances, so no
// conflict handling; check_instance still rejects genuinely bad shapes.
inline Instance sized(const Schema& s, Instance inst) {
  for (const auto& [name, ty] : s) {
    auto it = inst.mats.find(name);
    if (it == inst.mats.end()) continue;
    if (!ty.rows.is_one()) inst.sizes.emplace(ty.rows.name(), it->second.rows());
    if (!ty.cols.is_one()) inst.sizes.emplace(ty.cols.name(), it->second.cols());
  }
  return inst;
}

inline Matrix mk_bool(std::initializer_list<std::initializer_list<int>> rows) {
  Matrix m(rows.size(), rows.begin()->size(), Ring::Bool);
  std::size_t i = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (int v : row) m.set(i, j++, ScalarValue::of_bool(v != 0));
    ++i;
  }
  return m;
}

}  // namespace matlang::testing
