#pragma once

// Bounded exhaustive enumeration of concrete states — the ground truth the
// engine is tested against.  States are built constructively: reference
// slots (stack variables first, then reference fields of cells in
// allocation order) are decided one at a time, and a cell is allocated the
// first time a slot chooses a fresh target.  Locations therefore come out
// numbered in discovery order, so each garbage-free state is produced
// exactly once and garbage cells are never produced at all.  Optionally one
// never-allocated location stands in for all dangling targets.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sepgen/il/ast.hpp"

namespace sepgen::oracle {

struct StateSpace {
  il::DataDecl decl;                  // the single record type in play
  std::vector<std::string> ref_vars;  // reference-valued stack variables
  std::vector<std::string> int_vars;  // integer-valued stack variables
  std::vector<int64_t> ints = {0};    // values integer slots range over
  // When nonempty, stack integer variables range over this list instead of
  // `ints` (cell payloads keep using `ints`).
  std::vector<int64_t> stack_ints;
  int max_cells = 4;
  bool dangling = true;  // allow one never-allocated target location
};

// Calls `fn` once per state; stops early when `fn` returns false.  Returns
// the number of states visited.
uint64_t enumerate_states(
    const StateSpace& space,
    const std::function<bool(const il::ConcreteState&)>& fn);

}  // namespace sepgen::oracle
