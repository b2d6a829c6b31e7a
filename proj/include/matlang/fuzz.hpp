// Seeded generation of well-typed random programs plus their instances,
// and the differential harness that runs every applicable lowering pass
// against direct evaluation.
#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "matlang/eval.hpp"
#include "matlang/ir.hpp"

namespace matlang {

struct FuzzConfig {
  std::uint64_t seed = 0;
  std::size_t cases = 100;
  std::size_t max_dim = 4;
};

struct GenProgram {
  Schema schema;
  Expr expr;
  Instance inst;
  Dialect target;  // the construct set the generator aimed for
};

// Type-directed: the program is well-typed by construction and uses only
// constructs of the target dialect (ML, FOR_ML, SIFOR_ML, DEC_ML or CORE).
// Entries are nonnegative and small; canonical loops are always seeded by
// a let-bound column vector so the loop count is concrete.
GenProgram gen_program(std::mt19937_64& rng, Dialect target,
                       std::size_t max_dim);

struct FuzzFailure {
  std::size_t case_index = 0;
  std::string phase;
  std::string message;
  std::string program;                          // printed source
  std::map<std::string, std::string> matrices;  // printed instance
  std::map<std::string, std::size_t> sizes;
};

struct FuzzResult {
  std::size_t cases = 0;
  std::size_t compared = 0;  // cases that reached a lowering comparison
  std::size_t skipped = 0;   // direct evaluation hit an arithmetic error
  std::vector<FuzzFailure> failures;
};

std::string render_failure(const FuzzFailure& f);

// Per case: print/parse round-trip, direct evaluation, the lowering passes
// the program's dialect admits (each compared cell-for-cell, with 1e-9
// relative tolerance on real-domain rings), and a check that the result
// shape and ring match the inferred type.
FuzzResult run_fuzz(const FuzzConfig& cfg);

}  // namespace matlang
