#pragma once

// Exact-footprint satisfaction: does a concrete state model a symbolic heap?
//
// ⟨h, s⟩ ⊨ Δ holds when the bound variables of Δ can be given values such
// that the spatial atoms partition the heap exactly (no cell left over, none
// used twice), with predicate applications interpreted by their least
// fixed-point unfoldings, and the pure parts hold.  Free variables of Δ take
// their values from the stack.
//
// The check is a backtracking matcher and is decidable only up to a budget:
// the result is three-valued, with Unknown reported when the step or
// unfolding budget runs out or when a constraint is left underdetermined
// (e.g. a quantified variable that no atom pins down).

#include <map>
#include <string>

#include "sepgen/il/interp.hpp"
#include "sepgen/sl/formula.hpp"

namespace sepgen::sl {

enum class Sat3 { No, Yes, Unknown };

inline const char* to_string(Sat3 s) {
  switch (s) {
    case Sat3::No: return "no";
    case Sat3::Yes: return "yes";
    case Sat3::Unknown: return "unknown";
  }
  return "?";
}

struct SatOptions {
  uint64_t step_budget = 500000;  // backtracking nodes before giving up
  int unfold_budget = 64;         // predicate unfoldings along one branch
};

struct SatWitness {
  // Values found for the symbolic heap's own bound variables.
  std::map<std::string, il::Value> bound_values;
};

// Satisfaction of a single symbolic heap.  Throws std::invalid_argument if a
// free variable of `h` has no stack value.
Sat3 satisfies(const il::ConcreteState& state, const SymHeap& h, const PredEnv& env,
               const SatOptions& opts = {}, SatWitness* witness = nullptr);

// Satisfaction of a disjunction: Yes if some disjunct holds, No if all fail,
// Unknown otherwise.
Sat3 satisfies(const il::ConcreteState& state, const Formula& f, const PredEnv& env,
               const SatOptions& opts = {}, SatWitness* witness = nullptr);

}  // namespace sepgen::sl
