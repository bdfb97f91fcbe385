// Command-line front end: reads a program and a specification, explores the
// program from a named precondition, and writes the generated test inputs,
// a branch-coverage report, and a plain-text summary.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "sepgen/gen/pipeline.hpp"

namespace fs = std::filesystem;
using namespace sepgen;

namespace {

std::optional<std::string> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trace_str(const std::vector<il::BranchEvent>& bs) {
  if (bs.empty()) return "(none)";
  std::string s;
  for (const auto& b : bs) {
    if (!s.empty()) s += ' ';
    s += std::to_string(b.stmt);
    s += b.taken ? 'T' : 'F';
  }
  return s;
}

const char* status_str(sym::PathOutcome::Status s) {
  switch (s) {
    case sym::PathOutcome::Status::Normal: return "normal";
    case sym::PathOutcome::Status::AssertViolation: return "assert-violation";
    case sym::PathOutcome::Status::Fault: return "fault";
    case sym::PathOutcome::Status::DepthBounded: return "bounded";
  }
  return "?";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"test-input generation for heap programs from separation-logic"
               " preconditions"};
  std::string program_path, spec_path, pre_name, out_dir = "out";
  gen::PipelineOptions opts;
  opts.explore.solver.int_lo = -16;
  opts.explore.solver.int_hi = 16;
  int verbose = 0;

  app.add_option("-p,--program", program_path, "program file")->required();
  app.add_option("-s,--spec", spec_path, "specification file")->required();
  app.add_option("--pre", pre_name,
                 "precondition name (defaults to the only one in the spec)");
  app.add_option("--loop-bound", opts.explore.loop_bound,
                 "back-edge traversals allowed per loop head")
      ->capture_default_str();
  app.add_option("--depth", opts.explore.depth,
                 "lazy-initialization chain length allowed per symbol")
      ->capture_default_str();
  app.add_option("--int-lo", opts.explore.solver.int_lo,
                 "integer model window, lower end")
      ->capture_default_str();
  app.add_option("--int-hi", opts.explore.solver.int_hi,
                 "integer model window, upper end")
      ->capture_default_str();
  app.add_option("--unfold-depth", opts.explore.solver.unfold_depth,
                 "solver unfolding depth per predicate occurrence")
      ->capture_default_str();
  app.add_option("--iter-cap", opts.explore.lfp_iter_cap,
                 "fixpoint iteration cap for context computation")
      ->capture_default_str();
  app.add_option("--path-limit", opts.explore.path_limit,
                 "terminal path events before exploration gives up")
      ->capture_default_str();
  app.add_option("-o,--out", out_dir, "output directory")
      ->capture_default_str();
  app.add_flag("-v", verbose, "print per-path detail (-vv adds formulas)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  auto program_text = slurp(program_path);
  if (!program_text) {
    std::cerr << "cannot read program file '" << program_path << "'\n";
    return 2;
  }
  auto spec_text = slurp(spec_path);
  if (!spec_text) {
    std::cerr << "cannot read specification file '" << spec_path << "'\n";
    return 2;
  }

  il::Program prog;
  sl::SpecFile spec;
  try {
    prog = il::parse_program(*program_text);
    spec = sl::parse_spec(*spec_text, &prog.decls);
  } catch (const il::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  }

  if (pre_name.empty()) {
    if (spec.preconds.size() != 1) {
      std::cerr << "specification has " << spec.preconds.size()
                << " preconditions; pick one with --pre\n";
      return 2;
    }
    pre_name = spec.preconds.begin()->first;
  }
  auto pit = spec.preconds.find(pre_name);
  if (pit == spec.preconds.end()) {
    std::cerr << "no precondition named '" << pre_name << "'\n";
    return 2;
  }

  gen::PipelineResult r;
  try {
    r = gen::run_pipeline(prog, pit->second, spec.env, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }

  if (verbose > 0) {
    for (size_t i = 0; i < r.explored.outcomes.size(); ++i) {
      const auto& o = r.explored.outcomes[i];
      std::cout << "path " << i << ": " << status_str(o.status) << " "
                << trace_str(o.branches);
      if (!o.note.empty()) std::cout << " -- " << o.note;
      if (!o.provenance.empty()) std::cout << " [" << o.provenance << "]";
      std::cout << "\n";
      if (verbose > 1) {
        std::cout << "  input: " << o.input.str() << "\n";
        std::cout << "  delta: " << o.delta.str() << "\n";
      }
    }
  }

  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "tests", ec);
  if (ec) {
    std::cerr << "cannot create output directory '" << out_dir << "'\n";
    return 2;
  }

  for (size_t i = 0; i < r.tests.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "test_%03zu.json", i + 1);
    std::ofstream f(fs::path(out_dir) / "tests" / name, std::ios::binary);
    f << gen::test_json(r.tests[i].input, prog).dump(2) << "\n";
    if (!f) {
      std::cerr << "cannot write '" << name << "'\n";
      return 2;
    }
  }
  {
    std::ofstream f(fs::path(out_dir) / "coverage.json", std::ios::binary);
    f << gen::coverage_json(r.coverage).dump(2) << "\n";
  }

  int valid = 0, replayed = 0;
  for (const auto& t : r.tests) {
    valid += t.valid;
    replayed += t.exited && t.trace_match;
  }

  std::ostringstream sum;
  sum << "program: " << fs::path(program_path).filename().string() << " ("
      << prog.stmts.size() << " statements)\n";
  sum << "precondition: " << pre_name << "\n";
  sum << "paths: " << r.explored.outcomes.size() << " (" << r.stats.normal
      << " normal, " << r.stats.violations << " assert-violating, "
      << r.stats.faults << " faulting, " << r.stats.bounded << " bounded)\n";
  sum << "tests: " << r.tests.size() << " emitted, " << valid << " valid, "
      << replayed << " replayed exactly\n";
  sum << "branch coverage: " << r.coverage.covered << "/" << r.coverage.total
      << "\n";
  for (const auto& s : r.coverage.sides)
    sum << "  stmt " << s.stmt << " " << (s.dir ? "T" : "F") << ": " << s.hits
        << " hits\n";
  bool any_uncovered = false;
  for (const auto& s : r.coverage.sides) any_uncovered |= s.hits == 0;
  if (any_uncovered) {
    sum << "uncovered sides (no terminating path takes them at this"
           " bound):\n";
    for (const auto& s : r.coverage.sides)
      if (s.hits == 0)
        sum << "  stmt " << s.stmt << " " << (s.dir ? "T" : "F") << "\n";
  }
  if (r.stats.violations > 0) {
    sum << "assertion violations:\n";
    for (size_t i = 0; i < r.explored.outcomes.size(); ++i) {
      const auto& o = r.explored.outcomes[i];
      if (o.status == sym::PathOutcome::Status::AssertViolation)
        sum << "  path " << i << ": trace " << trace_str(o.branches) << "\n";
    }
  }
  if (r.stats.faults > 0) {
    sum << "diagnosed faults:\n";
    for (size_t i = 0; i < r.explored.outcomes.size(); ++i) {
      const auto& o = r.explored.outcomes[i];
      if (o.status == sym::PathOutcome::Status::Fault)
        sum << "  path " << i << ": " << o.note << " (trace "
            << trace_str(o.branches) << ")\n";
    }
  }
  if (!r.skipped.empty()) {
    sum << "paths without tests:\n";
    for (const auto& s : r.skipped)
      sum << "  path " << s.outcome << ": " << s.reason << "\n";
  }

  {
    std::ofstream f(fs::path(out_dir) / "summary.txt", std::ios::binary);
    f << sum.str();
  }
  std::cout << sum.str();
  std::cout << "wrote " << r.tests.size() << " test inputs to " << out_dir
            << "/tests\n";

  if (!r.all_valid() || !r.all_replayed()) {
    std::cout << "FAIL: some tests are invalid or replay diverged\n";
    return 1;
  }
  return 0;
}
