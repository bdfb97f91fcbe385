#include "sepgen/solver/solver.hpp"

#include <algorithm>
#include <vector>

#include "sepgen/solver/pure.hpp"

namespace sepgen::solver {

namespace {

using il::Loc;
using il::Value;

sl::Term term_of_key(const std::string& key) {
  return key == "null" ? sl::Term::null() : sl::Term::mk_var(key);
}

// Decides a predicate-free heap and builds a model on success.
SatResult model_base(const sl::SymHeap& g, const sl::PredEnv& env, const SolverOptions& opts,
                     CheckResult& out) {
  Congruence c(g);  // caller already ruled out contradictions

  auto sorts = sl::infer_sorts(g, env);

  // Reference classes: null first, then allocated cells in spatial order,
  // then the rest (null when nothing forbids it, else a fresh location).
  std::map<std::string, Value> class_val;
  std::string null_key = c.find(sl::Term::null());
  class_val[null_key] = Value::null();
  uint32_t next_loc = 1;
  for (const auto& key : c.allocated()) class_val[key] = Value::loc(Loc{next_loc++});
  std::vector<std::string> null_keys{null_key};
  for (const auto& [v, sort] : sorts) {
    if (!sort.is_ptr()) continue;
    std::string key = c.find(sl::Term::mk_var(v));
    if (class_val.count(key)) continue;
    bool can_be_null = true;
    for (const auto& nk : null_keys)
      if (c.distinct(term_of_key(key), term_of_key(nk))) {
        can_be_null = false;
        break;
      }
    if (can_be_null) {
      class_val[key] = Value::null();
      null_keys.push_back(key);
    } else {
      class_val[key] = Value::loc(Loc{next_loc++});
    }
  }

  // Integer part.
  ArithResult ar = solve_arith(g.arith, {opts.int_lo, opts.int_hi, opts.node_budget});
  if (ar.status == ArithStatus::Unsat) return SatResult::Unsat;
  if (ar.status == ArithStatus::Unknown) return SatResult::Unknown;

  out.status = SatResult::Sat;
  out.base = g;
  out.model.clear();
  for (const auto& [v, sort] : sorts) {
    if (sort.is_ptr()) {
      out.model.emplace(v, class_val.at(c.find(sl::Term::mk_var(v))));
    } else {
      auto it = ar.model.find(v);
      out.model.emplace(v, Value::integer(it == ar.model.end() ? 0 : it->second));
    }
  }
  return SatResult::Sat;
}

}  // namespace

bool pure_refuted(const sl::SymHeap& h) {
  Congruence c(h);
  if (c.contradictory()) return true;
  if (!h.arith || h.arith->is_true()) return false;
  std::vector<AtomConj> branches;
  try {
    branches = to_dnf(h.arith);
  } catch (const std::runtime_error&) {
    return false;  // too large to normalize; cannot refute
  }
  for (const auto& b : branches)
    if (!conj_refuted(b)) return false;
  return true;  // every branch (or the whole disjunction) is empty
}

CheckResult check_sat(const sl::SymHeap& h, const sl::PredEnv& env, const SolverOptions& opts) {
  struct Node {
    sl::SymHeap heap;
    std::map<uint64_t, int> depth;  // unfolding chain length per occurrence
  };

  uint64_t next_occ = 1;
  Node start{h, {}};
  for (auto& sa : start.heap.spatial)
    if (auto* pa = std::get_if<sl::PredApp>(&sa)) {
      pa->occ_id = next_occ++;
      start.depth[pa->occ_id] = 0;
    }

  std::vector<Node> stack{std::move(start)};
  bool open_branch = false;
  uint64_t nodes = 0;
  CheckResult res;

  while (!stack.empty()) {
    Node n = std::move(stack.back());
    stack.pop_back();
    if (++nodes > opts.node_budget) {
      open_branch = true;
      break;
    }
    if (pure_refuted(n.heap)) continue;

    const sl::PredApp* occ = nullptr;
    for (const auto& sa : n.heap.spatial)
      if (const auto* pa = std::get_if<sl::PredApp>(&sa)) {
        occ = pa;
        break;
      }
    if (!occ) {
      SatResult s = model_base(n.heap, env, opts, res);
      if (s == SatResult::Sat) return res;
      if (s == SatResult::Unknown) open_branch = true;
      continue;
    }

    int d = n.depth.at(occ->occ_id);
    if (d >= opts.unfold_depth) {
      open_branch = true;  // depth cut: this branch stays open
      continue;
    }
    auto children = sl::unfold(n.heap, occ->occ_id, env, &next_occ);
    for (auto it = children.rbegin(); it != children.rend(); ++it) {
      Node child{std::move(*it), n.depth};
      child.depth.erase(occ->occ_id);
      for (const auto& sa : child.heap.spatial)
        if (const auto* pa = std::get_if<sl::PredApp>(&sa))
          if (!child.depth.count(pa->occ_id)) child.depth[pa->occ_id] = d + 1;
      stack.push_back(std::move(child));
    }
  }

  res.status = open_branch ? SatResult::Unknown : SatResult::Unsat;
  res.model.clear();
  return res;
}

CheckResult check_sat(const sl::Formula& f, const sl::PredEnv& env, const SolverOptions& opts) {
  bool unknown = false;
  for (size_t i = 0; i < f.size(); ++i) {
    CheckResult r = check_sat(f[i], env, opts);
    if (r.status == SatResult::Sat) {
      r.disjunct = i;
      return r;
    }
    if (r.status == SatResult::Unknown) unknown = true;
  }
  CheckResult r;
  r.status = unknown ? SatResult::Unknown : SatResult::Unsat;
  return r;
}

}  // namespace sepgen::solver
