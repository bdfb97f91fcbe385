#pragma once

// Concrete small-step interpreter for the core language.  Execution is
// deterministic; a step either produces the next configuration or halts with
// a status.  Faults (null dereference, missing field, type mismatch, bad jump
// target, arithmetic overflow) never abort the process — they are reported in
// the halt status.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sepgen/il/ast.hpp"

namespace sepgen::il {

struct ConcreteConfig {
  const Program* prog = nullptr;
  ConcreteState state;
  int pc = 0;
  uint32_t next_loc = 1;  // next fresh heap location id
};

enum class HaltKind { Exit, Assertion, Fault, Timeout };

struct Halted {
  HaltKind kind;
  int pc = 0;           // statement at which execution stopped
  std::string reason;   // human-readable fault description
};

struct InterpOptions {
  enum class Overflow { Error, Wrap };
  Overflow overflow = Overflow::Error;
};

// Result of evaluating an expression: a value or a fault description.
using EvalResult = std::variant<Value, std::string>;

EvalResult eval_expr(const ConcreteState& state, const Program& prog,
                     const Expr& e, const InterpOptions& opts = {});

// One small step.  Either the successor configuration or a halt.
using StepResult = std::variant<ConcreteConfig, Halted>;
StepResult step(const ConcreteConfig& cfg, const InterpOptions& opts = {});

// (statement index, branch taken) recorded at each conditional.
struct BranchEvent {
  int stmt = 0;
  bool taken = false;
  bool operator==(const BranchEvent&) const = default;
};

struct Trace {
  std::vector<int> pcs;                // statements executed, in order
  std::vector<BranchEvent> branches;   // conditional outcomes, in order
  Halted halt{HaltKind::Exit, 0, {}};
  ConcreteState final_state;
  uint64_t steps = 0;
};

// Runs from an initial state (parameters must be bound in state.stack).
// `fuel` bounds the number of steps; exhaustion reports HaltKind::Timeout.
Trace run(const Program& prog, const ConcreteState& init, uint64_t fuel,
          const InterpOptions& opts = {});

}  // namespace sepgen::il
