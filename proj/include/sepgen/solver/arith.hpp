#pragma once

// Linear integer arithmetic over ℤ, decided by interval propagation plus
// bounded model enumeration.  Propagation is sound over all of ℤ, so an empty
// interval refutes outright; a failed enumeration proves unsatisfiability
// only when the propagated intervals fit inside the search window, and is
// reported Unknown otherwise.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sepgen/sl/formula.hpp"

namespace sepgen::solver {

// A conjunction of atoms (one branch of a disjunctive normal form; negation
// has been pushed into the atoms).
using AtomConj = std::vector<sl::ArithAtom>;

// DNF of an arithmetic tree.  ¬(e = 0) becomes (e+1 <= 0) ∨ (-e+1 <= 0) and
// ¬(e <= 0) becomes (-e+1 <= 0), so branches contain only positive atoms.
// An empty result means the formula is equivalent to false; a branch that is
// an empty conjunction is equivalent to true.
std::vector<AtomConj> to_dnf(const sl::ArithPtr& t);

enum class ArithStatus { Sat, Unsat, Unknown };

struct ArithResult {
  ArithStatus status = ArithStatus::Unknown;
  std::map<std::string, int64_t> model;  // meaningful when Sat
};

struct ArithOptions {
  int64_t int_lo = -8;
  int64_t int_hi = 8;
  uint64_t node_budget = 200000;
};

// Decides one conjunction.  Every variable mentioned by the atoms receives a
// model value; enumeration order prefers values close to zero (0, -1, 1, ...)
// so models are small and deterministic.
ArithResult solve_conj(const AtomConj& atoms, const ArithOptions& opts = {});

// Decides a full tree by DNF: Sat on the first satisfiable branch, Unsat when
// every branch is refuted, Unknown otherwise.
ArithResult solve_arith(const sl::ArithPtr& t, const ArithOptions& opts = {});

// Propagation-only refutation of one conjunction (no enumeration, no window).
bool conj_refuted(const AtomConj& atoms);

}  // namespace sepgen::solver
