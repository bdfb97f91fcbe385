#pragma once

// End-to-end driver: explore a program symbolically from its precondition,
// then turn every normally-terminating path into a concrete test input,
// check it against the precondition, replay it on the interpreter, and
// measure branch coverage over the replays.

#include <string>
#include <vector>

#include "sepgen/gen/testgen.hpp"
#include "sepgen/sym/exec.hpp"

namespace sepgen::gen {

struct PipelineOptions {
  sym::ExploreOptions explore;
  uint64_t replay_fuel = 1ull << 20;
};

struct EmittedTest {
  TestInput input;
  size_t outcome = 0;        // index into explored.outcomes
  bool valid = false;        // input satisfies the precondition
  bool exited = false;       // replay ran to normal exit
  bool trace_match = false;  // replay branches equal the symbolic ones
  il::Trace trace;
};

// A normally-terminating path for which no test was produced, and why.
struct SkippedPath {
  size_t outcome = 0;
  std::string reason;
};

struct PipelineStats {
  int normal = 0;
  int violations = 0;  // assertion-violating paths (diagnosed, not emitted)
  int faults = 0;      // faulting paths (diagnosed, not emitted)
  int bounded = 0;     // paths cut by the loop or initialization bound
  int skipped_unsat = 0;
  int skipped_unknown = 0;
};

struct PipelineResult {
  sym::ExploreResult explored;
  std::vector<EmittedTest> tests;
  std::vector<SkippedPath> skipped;
  CoverageReport coverage;
  PipelineStats stats;

  bool all_valid() const {
    for (const auto& t : tests)
      if (!t.valid) return false;
    return true;
  }
  bool all_replayed() const {
    for (const auto& t : tests)
      if (!t.exited || !t.trace_match) return false;
    return true;
  }
};

// `env` is the predicate environment as written; exploration augments it
// internally, and validation runs against the original.
PipelineResult run_pipeline(const il::Program& prog, const sl::Formula& pre,
                            const sl::PredEnv& env,
                            const PipelineOptions& opts = {});

}  // namespace sepgen::gen
