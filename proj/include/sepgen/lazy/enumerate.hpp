#pragma once

// Lazy initialization driver: when execution touches an uninitialized
// reference value, produce the alternative contexts in which it has a
// concrete shape.  Which alternatives exist depends on whether the value is
// already pinned down, loose, or constrained by an inductive predicate.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sepgen/il/ast.hpp"
#include "sepgen/lazy/lfp.hpp"

namespace sepgen::lazy {

struct EnumOptions {
  LfpOptions lfp;
  // Record declarations, needed to materialize a fresh cell.
  const std::vector<il::DataDecl>* decls = nullptr;
};

struct EnumResult {
  // 1: already initialized (context unchanged); 2: unconstrained, classic
  // null / fresh-cell / alias alternatives; 3: predicate-constrained,
  // alternatives from the fixpoint enumeration.
  int scenario = 0;
  std::vector<EnumContext> contexts;
  LfpResult fix;  // populated for scenario 3
};

// Alternatives for initializing program variable `x` (reference-typed, with
// symbolic value s.at(x)) under `ctx`.  `node_type` is the record type the
// access site requires; `env` should be the augmented environment.  Every
// returned context is satisfiable.
EnumResult enumerate_values(const std::string& x,
                            const std::map<std::string, sl::Term>& s,
                            const EnumContext& ctx,
                            const std::string& node_type,
                            const sl::PredEnv& env, const EnumOptions& opts,
                            uint64_t* next_occ);

}  // namespace sepgen::lazy
