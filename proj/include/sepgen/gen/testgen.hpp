#pragma once

// Turning path outcomes into concrete test inputs.
//
// A path's outcome carries two formulas: `input` describes the pre-state
// footprint the path grew (with untouched structure still folded), and
// `delta` the final path condition.  The inputs that drive execution down
// the path are exactly the models of the input footprint constrained by the
// path condition's pure part; solving that combination and materializing
// the reachable closure of the model yields a replayable test.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sepgen/il/ast.hpp"
#include "sepgen/il/interp.hpp"
#include "sepgen/sl/formula.hpp"
#include "sepgen/sl/sat.hpp"
#include "sepgen/solver/solver.hpp"
#include "sepgen/sym/exec.hpp"

#include "json.hpp"

namespace sepgen::gen {

struct TestInput {
  // Stack holds exactly the program parameters; heap locations are
  // renumbered 1..n in reachability (breadth-first) order.
  il::ConcreteState state;
};

// The input footprint of `o` constrained by its path condition: spatial
// part from o.input, pure part from o.delta.
sl::SymHeap input_constraint(const sym::PathOutcome& o);

// Failure reasons reported through `why` below.
inline constexpr const char* kNoModel = "input constraint has no model";
inline constexpr const char* kUndecided =
    "solver could not decide the input constraint";

// Solve the input constraint and materialize the model.  `env` must be the
// augmented environment exploration used; `sigma` maps parameter names to
// their symbols.  Returns nothing and fills `why` when the constraint has
// no model within bounds (or the solver cannot tell).
std::optional<TestInput> build_input(const sym::PathOutcome& o,
                                     const std::map<std::string, std::string>& sigma,
                                     const il::Program& prog,
                                     const sl::PredEnv& env,
                                     const solver::SolverOptions& opts,
                                     std::string* why = nullptr);

// Exact precondition check, under the original (unaugmented) environment.
sl::Sat3 validate(const TestInput& t, const sl::Formula& pre,
                  const sl::PredEnv& env, const sl::SatOptions& opts = {});

// Concrete replay of a test against the path it was generated from.
struct ReplayResult {
  il::Trace trace;
  bool exited = false;       // HaltKind::Exit
  bool trace_match = false;  // branch events equal the outcome's
};
ReplayResult replay(const il::Program& prog, const TestInput& t,
                    const sym::PathOutcome& o, uint64_t fuel = 1 << 20);

// Branch coverage of a set of traces: every conditional contributes a true
// and a false side.
struct CoverageReport {
  struct Side {
    int stmt = 0;
    bool dir = false;
    int hits = 0;
  };
  std::vector<Side> sides;  // all sides of all conditionals, in order
  int covered = 0;          // sides with at least one hit
  int total = 0;            // 2 x number of conditionals
};
CoverageReport measure_coverage(const il::Program& prog,
                                const std::vector<il::Trace>& traces);

// JSON renderings.  Tests:
//   {"stack": {"x": null, "n": 3}, "heap": [{"loc": "L1", "type": "node",
//    "fields": {"val": 0, "next": null}}]}
// References render as {"ref": "L1"}; boolean fields as true/false.
nlohmann::ordered_json test_json(const TestInput& t, const il::Program& prog);
TestInput test_from_json(const nlohmann::ordered_json& j,
                         const il::Program& prog);
nlohmann::ordered_json coverage_json(const CoverageReport& r);

}  // namespace sepgen::gen
