#pragma once

// Path exploration.  Runs a program on symbolic input described by a
// separation-logic precondition, materializing the parts of the heap the
// program actually touches (lazy initialization).  Each completed path
// yields the final path condition together with the precondition refinement
// that drives execution down exactly that path.
//
// Programs whose expressions fall outside the symbolic fragment (products
// of two variables, computed jump targets) are rejected with
// std::runtime_error rather than silently misexplored.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sepgen/il/ast.hpp"
#include "sepgen/il/interp.hpp"
#include "sepgen/sl/formula.hpp"
#include "sepgen/solver/solver.hpp"
#include "sepgen/sym/state.hpp"

namespace sepgen::sym {

struct ExploreOptions {
  int loop_bound = 3;  // back-edge traversals allowed per loop head per path
  int depth = 5;       // initialization chain length allowed per symbol
  uint64_t path_limit = 100000;  // terminal events before giving up
  solver::SolverOptions solver;
  int lfp_iter_cap = 32;
};

struct PathOutcome {
  enum class Status {
    Normal,           // fell off the end of the program
    AssertViolation,  // an assert came out false
    Fault,            // memory/type error, same wording as the interpreter
    DepthBounded,     // cut by the loop bound or the initialization depth
  };

  Status status = Status::Normal;
  sl::SymHeap delta;  // final path condition
  sl::SymHeap input;  // precondition refinement for this path
  StackMap stack;     // final symbolic stack
  std::vector<il::BranchEvent> branches;
  std::vector<int> pcs;
  std::string note;  // fault reason, or which bound was hit
  bool feasibility_unknown = false;
  std::string provenance;  // chain of lazy-initialization choices
};

struct ExploreStats {
  uint64_t steps = 0;
  uint64_t pruned_infeasible = 0;  // branches dropped as unsatisfiable
  uint64_t enum_calls = 0;         // lazy initializations performed
  bool truncated = false;          // path_limit hit; outcomes incomplete
};

struct ExploreResult {
  std::vector<PathOutcome> outcomes;  // in exploration (true-first) order
  std::map<std::string, std::string> sigma;  // parameter -> symbol name
  sl::PredEnv env;  // augmented environment used for feasibility checks
  ExploreStats stats;
};

// `pre` is written over the program's parameter names; its free variables
// must be parameters.  `env` is the raw predicate environment from the
// specification; explore augments it internally.
ExploreResult explore(const il::Program& prog, const sl::Formula& pre,
                      const sl::PredEnv& env, const ExploreOptions& opts = {});

}  // namespace sepgen::sym
