#pragma once

// Symbolic execution state.  A path carries a program counter, a symbolic
// stack (reference variables map to terms, integer/boolean variables to
// linear expressions with booleans 0/1-valued), and a pair of symbolic
// heaps: `delta` is the working path condition, `input` is the refinement
// of the precondition that this path was grown from.  Execution effects
// (stores, new, free, branch assumptions) land in `delta` only; `input`
// changes only when lazy initialization refines the precondition, so at any
// point it still describes the pre-state that drives the path.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "sepgen/il/ast.hpp"
#include "sepgen/il/interp.hpp"
#include "sepgen/sl/formula.hpp"

namespace sepgen::sym {

using StackMap = std::map<std::string, sl::Arg>;

struct SymbolicConfig {
  int pc = 0;
  StackMap stack;
  std::map<std::string, il::Type> types;  // static type of each bound variable
  sl::SymHeap delta;                      // working heap + path condition
  sl::SymHeap input;                      // precondition refinement
  std::vector<il::BranchEvent> branches;  // conditional outcomes so far
  std::vector<int> pcs;                   // statements executed, in order
  std::map<int, int> back_edges;          // traversals per loop head
  std::map<std::string, int> chain_depth; // initialization depth per symbol
  std::vector<sl::Term> freed;            // roots of cells removed by free
  uint64_t next_occ = 1;                  // occurrence id counter
  bool feasibility_unknown = false;       // some check came back unknown
  std::string provenance;                 // lazy-initialization choices made
};

// A dereference hit a reference value that has no matching cell yet: the
// caller must branch over the value's possible shapes and retry the
// statement in each resulting context.
struct NeedsInit {
  std::string base_var;   // program variable whose value needs a shape
  std::string node_type;  // record type the access site expects
};

// The statement faults in every model of the current path.  The wording
// matches the concrete interpreter so traces line up.
struct EvalFault {
  std::string reason;
};

using EvalOutcome = std::variant<sl::Arg, NeedsInit, EvalFault>;

// One way a boolean expression comes out true (or false): a conjunction of
// alias literals and an arithmetic constraint to assume on the path.
struct Assumption {
  std::vector<sl::PureLit> lits;
  sl::ArithPtr arith;  // may be null: no arithmetic part

  bool trivial() const { return lits.empty() && (!arith || arith->is_true()); }
};

// A fault that only occurs under an assumption, e.g. the right operand of
// `&&` faulting: it is evaluated only when the left operand holds.
struct FaultAlt {
  Assumption guard;
  std::string reason;
};

// Truth split of a boolean expression.  The true and false alternatives are
// mutually exclusive by construction, and together with the fault
// alternatives they cover every model of the path.
struct BoolSplit {
  std::vector<Assumption> when_true;
  std::vector<Assumption> when_false;
  std::vector<FaultAlt> faults;
};

using BoolOutcome = std::variant<BoolSplit, NeedsInit, EvalFault>;

// Returned by sym_bool when the expression is not boolean at all; the
// statement handler owns the wording ("assert on non-boolean" vs
// "conditional on non-boolean"), so the reason is left for it to fill in.
inline constexpr const char* kNonBoolean = "";

EvalOutcome sym_eval(const SymbolicConfig& cfg, const il::Program& prog,
                     const il::Expr& e);

BoolOutcome sym_bool(const SymbolicConfig& cfg, const il::Program& prog,
                     const il::Expr& e);

// Does `e` denote a boolean operator application (as opposed to a value
// that happens to be boolean)?  Such expressions have no single symbolic
// value and must be lowered through sym_bool.
bool is_bool_op(const il::Expr& e);

// Static type of `e` under the configuration's variable typing, when one
// can be assigned.
std::optional<il::Type> expr_type(const SymbolicConfig& cfg,
                                  const il::Program& prog, const il::Expr& e);

// Index into delta.spatial of the points-to atom whose root equals `t`
// under the heap's congruence; kNull if t is provably null, kNoCell when no
// atom matches (and lazy initialization should decide).
inline constexpr int kNoCell = -1;
inline constexpr int kNull = -2;
int resolve_cell(const sl::SymHeap& delta, const sl::Term& t);

// Like resolve_cell, but with the freed-cell history taken into account.
struct RefClass {
  enum class Kind { Null, Dangling, Cell, Unknown };
  Kind kind = Kind::Unknown;
  int index = kNoCell;  // spatial index when kind == Cell
};
RefClass classify_ref(const SymbolicConfig& cfg, const sl::Term& t);

// Conjoin an assumption onto a heap.
void assume(sl::SymHeap& h, const Assumption& a);

// Every symbol in use anywhere in the configuration; fresh symbols must
// avoid these.
std::set<std::string> names_in_use(const SymbolicConfig& cfg);

}  // namespace sepgen::sym
