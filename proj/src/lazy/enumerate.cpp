#include "sepgen/lazy/enumerate.hpp"

#include <algorithm>
#include <stdexcept>

#include "sepgen/lazy/rele.hpp"
#include "sepgen/solver/pure.hpp"
#include "sepgen/solver/solver.hpp"

namespace sepgen::lazy {

namespace {

bool is_allocated(const solver::Congruence& c, const sl::Term& t) {
  const auto& alloc = c.allocated();
  return std::find(alloc.begin(), alloc.end(), c.find(t)) != alloc.end();
}

// Does any predicate application constrain X, i.e. mention it (modulo
// aliasing) among its pointer arguments?
bool pred_constrained(const sl::SymHeap& delta, const sl::Term& X,
                      const solver::Congruence& c) {
  for (const auto& sa : delta.spatial) {
    const auto* app = std::get_if<sl::PredApp>(&sa);
    if (!app) continue;
    for (const auto& a : app->args)
      if (const auto* t = std::get_if<sl::Term>(&a))
        if (t->is_var() && c.same(*t, X)) return true;
  }
  return false;
}

bool satisfiable(const sl::SymHeap& h, const sl::PredEnv& env,
                 const solver::SolverOptions& o) {
  return solver::check_sat(h, env, o).status != solver::SatResult::Unsat;
}

}  // namespace

EnumResult enumerate_values(const std::string& x,
                            const std::map<std::string, sl::Term>& s,
                            const EnumContext& ctx,
                            const std::string& node_type,
                            const sl::PredEnv& env, const EnumOptions& opts,
                            uint64_t* next_occ) {
  auto it = s.find(x);
  if (it == s.end())
    throw std::invalid_argument("enumerate_values: no symbolic value for '" +
                                x + "'");
  const sl::Term& X = it->second;
  solver::Congruence c(ctx.delta);

  // Scenario 1: the value is already pinned to null or to a cell.
  if (c.same(X, sl::Term::null()) || is_allocated(c, X)) {
    EnumResult r;
    r.scenario = 1;
    r.contexts = {ctx};
    return r;
  }

  // Scenario 3: an inductive predicate constrains the value; enumerate the
  // shapes consistent with it.
  if (pred_constrained(ctx.delta, X, c)) {
    std::set<std::string> seed{X.var};
    for (const auto& [pv, t] : s) {
      (void)pv;
      if (t.is_var() && is_allocated(c, t)) seed.insert(t.var);
    }
    std::set<std::string> V = rele(seed, ctx.delta);
    auto ids = constraining_occurrences(V, ctx.delta);
    EnumContext marked = ctx;
    set_marks(marked.delta, ids);
    set_marks(marked.input, ids);
    EnumResult r;
    r.scenario = 3;
    r.fix = lfp(x, s, marked, V, env, opts.lfp, next_occ);
    r.contexts = r.fix.contexts;
    return r;
  }

  // Scenario 2: loose value — null, a fresh cell, or any existing
  // input-originated cell of the right record type.
  EnumResult r;
  r.scenario = 2;

  EnumContext to_null = ctx;
  conjoin(to_null.delta, sl::PureLit{true, X, sl::Term::null()});
  conjoin(to_null.input, sl::PureLit{true, X, sl::Term::null()});
  to_null.provenance += ":null";
  if (satisfiable(to_null.delta, env, opts.lfp.solver))
    r.contexts.push_back(std::move(to_null));

  if (!opts.decls)
    throw std::invalid_argument(
        "enumerate_values: record declarations required for a fresh cell");
  const il::DataDecl* decl = nullptr;
  for (const auto& d : *opts.decls)
    if (d.name == node_type) decl = &d;
  if (!decl)
    throw std::invalid_argument("enumerate_values: unknown record '" +
                                node_type + "'");
  std::set<std::string> avoid;
  sl::collect_all_vars(ctx.delta, avoid);
  sl::collect_all_vars(ctx.input, avoid);
  sl::PointsTo cell;
  cell.root = X;
  cell.node_type = node_type;
  for (const auto& [fname, ftype] : decl->fields) {
    std::string nn = sl::fresh_name(fname + "1", avoid);
    avoid.insert(nn);
    if (ftype.is_node())
      cell.fields.emplace_back(sl::Term::mk_var(nn));
    else
      cell.fields.emplace_back(sl::LinExpr::variable(nn));
  }
  EnumContext to_fresh = ctx;
  to_fresh.delta.spatial.push_back(cell);
  to_fresh.input.spatial.push_back(cell);
  to_fresh.provenance += ":new";
  if (satisfiable(to_fresh.delta, env, opts.lfp.solver))
    r.contexts.push_back(std::move(to_fresh));

  for (const auto& sa : ctx.delta.spatial) {
    const auto* p = std::get_if<sl::PointsTo>(&sa);
    if (!p || p->node_type != node_type || !p->root.is_var()) continue;
    bool input_cell = false;
    for (const auto& ia : ctx.input.spatial)
      if (const auto* ip = std::get_if<sl::PointsTo>(&ia))
        if (ip->root == p->root) input_cell = true;
    if (!input_cell) continue;  // allocated during execution, not an input
    EnumContext aliased = ctx;
    conjoin(aliased.delta, sl::PureLit{true, X, p->root});
    conjoin(aliased.input, sl::PureLit{true, X, p->root});
    aliased.provenance += ":=" + p->root.var;
    if (satisfiable(aliased.delta, env, opts.lfp.solver))
      r.contexts.push_back(std::move(aliased));
  }
  return r;
}

}  // namespace sepgen::lazy
