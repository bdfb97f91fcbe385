#include "sepgen/gen/pipeline.hpp"

namespace sepgen::gen {

PipelineResult run_pipeline(const il::Program& prog, const sl::Formula& pre,
                            const sl::PredEnv& env,
                            const PipelineOptions& opts) {
  PipelineResult r;
  r.explored = sym::explore(prog, pre, env, opts.explore);

  std::vector<il::Trace> traces;
  for (size_t i = 0; i < r.explored.outcomes.size(); ++i) {
    const sym::PathOutcome& o = r.explored.outcomes[i];
    switch (o.status) {
      case sym::PathOutcome::Status::AssertViolation:
        ++r.stats.violations;
        continue;
      case sym::PathOutcome::Status::Fault:
        ++r.stats.faults;
        continue;
      case sym::PathOutcome::Status::DepthBounded:
        ++r.stats.bounded;
        continue;
      case sym::PathOutcome::Status::Normal:
        ++r.stats.normal;
        break;
    }

    std::string why;
    std::optional<TestInput> in = build_input(
        o, r.explored.sigma, prog, r.explored.env, opts.explore.solver, &why);
    if (!in) {
      if (why == kNoModel)
        ++r.stats.skipped_unsat;
      else
        ++r.stats.skipped_unknown;
      r.skipped.push_back({i, std::move(why)});
      continue;
    }

    EmittedTest t;
    t.input = std::move(*in);
    t.outcome = i;
    t.valid = validate(t.input, pre, env) == sl::Sat3::Yes;
    ReplayResult rep = replay(prog, t.input, o, opts.replay_fuel);
    t.exited = rep.exited;
    t.trace_match = rep.trace_match;
    t.trace = std::move(rep.trace);
    traces.push_back(t.trace);
    r.tests.push_back(std::move(t));
  }

  r.coverage = measure_coverage(prog, traces);
  return r;
}

}  // namespace sepgen::gen
