#pragma once

// Satisfiability of symbolic heaps with inductive predicates.
//
// The search unfolds the leftmost predicate occurrence depth-first, refuting
// branches whose pure part is already contradictory (unfolding only ever
// adds constraints, so this prune is sound).  A predicate-free heap is
// decided exactly on its reference part (congruence closure plus the
// disequalities induced by separation) and up to a window on its integer
// part.  Unsat is only reported when every branch was refuted with no branch
// cut by the depth or integer window; otherwise the result degrades to
// Unknown.

#include <map>
#include <string>

#include "sepgen/il/ast.hpp"
#include "sepgen/solver/arith.hpp"
#include "sepgen/sl/formula.hpp"

namespace sepgen::solver {

struct SolverOptions {
  int unfold_depth = 6;  // unfolding chain length per occurrence
  int64_t int_lo = -8;   // integer model window
  int64_t int_hi = 8;
  uint64_t node_budget = 1000000;
};

enum class SatResult { Sat, Unsat, Unknown };

inline const char* to_string(SatResult r) {
  switch (r) {
    case SatResult::Sat: return "sat";
    case SatResult::Unsat: return "unsat";
    case SatResult::Unknown: return "unknown";
  }
  return "?";
}

struct CheckResult {
  SatResult status = SatResult::Unknown;
  // On Sat: the predicate-free heap reached by unfolding, and a value for
  // every variable occurring in it (existentials included).  Allocated cells
  // get distinct locations numbered in spatial order; unconstrained
  // references prefer null, unconstrained integers prefer 0.
  sl::SymHeap base;
  std::map<std::string, il::Value> model;
  size_t disjunct = 0;  // index of the satisfied disjunct (Formula overload)
};

CheckResult check_sat(const sl::SymHeap& h, const sl::PredEnv& env,
                      const SolverOptions& opts = {});
CheckResult check_sat(const sl::Formula& f, const sl::PredEnv& env,
                      const SolverOptions& opts = {});

// Sound refutation of a heap without unfolding: contradiction in the
// reference part, or an integer part whose normal form is refuted by
// interval reasoning alone.  `false` means "not refuted", not "satisfiable".
bool pure_refuted(const sl::SymHeap& h);

}  // namespace sepgen::solver
