#pragma once

// A seeded random corpus of symbolic heaps, plus an agreement check pitting
// the satisfiability solver against bounded exhaustive state enumeration.
//
// Each formula draws from one record family (singly-linked, doubly-linked,
// or binary nodes) so its models can be enumerated over a single record
// type.  Integer payload fields are only ever compared against constants the
// formula mentions, so the enumeration ranges payloads over exactly those
// constants plus zero: any model can be renamed into that set, making the
// reduced scan exhaustive in effect.  Stack integer variables range over the
// full window since arithmetic atoms constrain them directly.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sepgen/il/ast.hpp"
#include "sepgen/sl/formula.hpp"
#include "sepgen/solver/solver.hpp"

namespace sepgen::oracle {

struct CorpusFormula {
  sl::SymHeap heap;
  il::DataDecl decl;                    // record family in play
  std::vector<std::string> ref_vars;    // free reference variables
  std::vector<std::string> int_vars;    // free integer variables
  std::vector<int64_t> payload_values;  // payload quotient for enumeration
};

// Predicate environment shared by all corpus formulas.
const sl::PredEnv& corpus_env();

CorpusFormula random_formula(std::mt19937_64& rng);

enum class AgreeOutcome {
  SatValidated,    // Sat, and the returned model satisfies the formula
  UnsatConfirmed,  // Unsat, and enumeration finds no model either
  Unknown,         // solver gave up (excluded from agreement, tracked)
  SatModelBad,     // Sat, but the returned model does not satisfy the formula
  UnsatRefuted,    // Unsat, but enumeration found a model
};

struct AgreeOptions {
  solver::SolverOptions solver;
  int64_t stack_lo = -3, stack_hi = 3;  // window for stack integer variables
  int max_cells = 6;
  // Enumeration shrinks the cell cap until the state count fits this budget,
  // keeping the worst unsat scan around a few seconds.
  uint64_t state_budget = 1000000;
};

AgreeOutcome check_agreement(const CorpusFormula& f, const AgreeOptions& opts,
                             std::string* diag = nullptr);

}  // namespace sepgen::oracle
