#pragma once

// Derived base facts of inductive predicates.
//
// A "base fact" abstracts one way a predicate can be satisfied, projected
// onto its formals: which reference formals are null, aliased, or allocated
// (a points-to with unconstrained fields), plus any arithmetic over the
// formals alone.  Facts are computed by repeatedly replacing predicate
// applications in definition bodies with already-derived facts and
// re-abstracting, until no new fact appears (the iteration is cut off after
// a fixed number of rounds; predicates whose arithmetic grows without bound,
// e.g. a size parameter incremented per unfolding, would otherwise produce
// infinitely many facts).

#include "sepgen/sl/formula.hpp"

namespace sepgen::solver {

sl::Formula base_formulas(const std::string& pred, const sl::PredEnv& env);

// A new environment where every definition gains those derived facts that
// carry a reference constraint not already present as a base case.  Facts
// that are syntactically identical to an existing disjunct, or that contain
// no reference literal at all (allocation and arithmetic alone — these
// describe heaps the original disjuncts already generate, and re-adding them
// with unconstrained fields would widen the predicate), are dropped.  In
// particular the environment is unchanged for definitions whose null/alias
// base behavior is already explicit.
sl::PredEnv augment_env(const sl::PredEnv& env);

}  // namespace sepgen::solver
