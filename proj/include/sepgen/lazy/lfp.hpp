#pragma once

// Fixpoint enumeration of initialization contexts.  Starting from a path
// condition with marked predicate occurrences, repeatedly unfold the marked
// occurrences one step, keeping only satisfiable results, until an
// abstraction of the target variable's possible values stops growing.  The
// contexts of the iteration *before* the fixpoint was detected are returned;
// in each, the target is pinned down to null, an existing cell, or a fresh
// cell with constrained fields.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sepgen/sl/formula.hpp"
#include "sepgen/solver/solver.hpp"

namespace sepgen::lazy {

// A refined path condition paired with the matching refinement of the
// original precondition.  `delta` accumulates execution effects; `input`
// only mirrors the predicate unfoldings (shared occurrence ids, identical
// freshening), so a model of it is a heap the program could have been
// started on.
struct EnumContext {
  sl::SymHeap delta;
  sl::SymHeap input;
  std::string provenance;  // dot-separated disjunct indices, e.g. "2.1"
};

// Unfolds the occurrence `occ_id` identically in both formulas of `ctx`:
// one result per disjunct of the definition, in definition order.  The two
// unfoldings share fresh names and occurrence ids.  When the occurrence is
// absent from `ctx.input`, the input half is carried through unchanged.
std::vector<EnumContext> unfold_pair(const EnumContext& ctx, uint64_t occ_id,
                                     const sl::PredEnv& env,
                                     uint64_t* next_occ);

// Abstract value of the target variable in one context: null, aliased to a
// relevant allocated variable, allocated but fresh (the location is treated
// as existentially bound, so two fresh-cell contexts abstract equally), or
// unknown.
struct AbstractFact {
  enum class Kind { Null, Existing, NewObj, True };
  Kind kind = Kind::True;
  std::string existing;  // variable name, only for Kind::Existing
  bool operator==(const AbstractFact&) const = default;
  std::string str(const std::string& x) const;
};

// abs: where does x's symbolic value sit in `h`?  Decided by the alias part
// and the allocated cells, first match in the order null / existing-in-V /
// fresh / unknown.
AbstractFact abs(const std::map<std::string, sl::Term>& s, const std::string& x,
                 const std::set<std::string>& V, const sl::SymHeap& h);

// One disjunct of an abstraction: the abstract value of x conjoined with the
// aliasing among the relevant variables.
struct AbsDisjunct {
  AbstractFact fact;
  std::vector<sl::PureLit> alias;
  bool operator==(const AbsDisjunct&) const = default;
};
using Abstraction = std::vector<AbsDisjunct>;  // disjunction; empty = false

// Validity of lhs => rhs over equalities/disequalities, with the abstract
// value of x encoded through a proxy variable.
bool abstraction_implies(const Abstraction& lhs, const Abstraction& rhs);

struct LfpOptions {
  int iter_cap = 32;  // hard stop; exceeding it throws
  solver::SolverOptions solver;
  bool dump = false;  // build the per-iteration text table
};

struct LfpResult {
  std::vector<EnumContext> contexts;  // the fixpoint set
  int iterations = 0;                 // unfold rounds until the test held
  Abstraction abstraction;            // abstraction of the returned set
  std::string dump;
};

// Runs the fixpoint loop for program variable `x` (symbolic value s.at(x))
// from `start`, whose constraining occurrences must already be marked in
// both formulas.  `V` is the relevant-variable closure; `env` should be the
// augmented environment.  Throws std::runtime_error when iter_cap is hit
// (e.g. a predicate that never grounds its root).
LfpResult lfp(const std::string& x, const std::map<std::string, sl::Term>& s,
              const EnumContext& start, const std::set<std::string>& V,
              const sl::PredEnv& env, const LfpOptions& opts = {},
              uint64_t* next_occ = nullptr);

}  // namespace sepgen::lazy
