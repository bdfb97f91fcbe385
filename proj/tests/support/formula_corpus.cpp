#include "formula_corpus.hpp"

#include <set>

#include "enumerate_states.hpp"
#include "model_state.hpp"
#include "sepgen/sl/sat.hpp"

namespace sepgen::oracle {

namespace {

const char* kCorpusSpec = R"(
pred sll(x) == emp & x = null \/ ex v,n. x->node{v,n} * sll(n);
pred eqlen(a,b) ==
     emp & a = null & b = null
  \/ ex n1,n2. a->node{_,n1} * b->node{_,n2} * eqlen(n1,n2);
pred dll(h,p) == emp & h = null \/ ex v,n. h->dnode{v,p,n} * dll(n,h);
pred bstsh(t) == emp & t = null \/ ex v,l,r. t->tnode{v,l,r} * bstsh(l) * bstsh(r);
pred pow2seg(root,out,n) ==
     root->node{0,out} & n = 0
  \/ ex m. pow2seg(root,m,n-1) * pow2seg(m,out,n-1) & n >= 1;
precond unused == sll(x);
)";

const il::DataDecl kNode{"node",
                         {{"val", il::Type::integer()}, {"next", il::Type::node_of("node")}}};
const il::DataDecl kDnode{"dnode",
                          {{"val", il::Type::integer()},
                           {"prev", il::Type::node_of("dnode")},
                           {"next", il::Type::node_of("dnode")}}};
const il::DataDecl kTnode{"tnode",
                          {{"val", il::Type::integer()},
                           {"left", il::Type::node_of("tnode")},
                           {"right", il::Type::node_of("tnode")}}};

size_t pick(std::mt19937_64& rng, size_t n) { return static_cast<size_t>(rng() % n); }

int64_t pick_in(std::mt19937_64& rng, int64_t lo, int64_t hi) {
  return lo + static_cast<int64_t>(rng() % static_cast<uint64_t>(hi - lo + 1));
}

}  // namespace

const sl::PredEnv& corpus_env() {
  static const sl::SpecFile spec = sl::parse_spec(kCorpusSpec);
  return spec.env;
}

CorpusFormula random_formula(std::mt19937_64& rng) {
  CorpusFormula f;
  size_t family = pick(rng, 3);
  f.decl = family == 0 ? kNode : family == 1 ? kDnode : kTnode;

  std::set<std::string> refs, ints;
  const std::vector<std::string> pool = {"x", "y", "z"};
  auto ref_term = [&](bool allow_null) {
    if (allow_null && pick(rng, 4) == 0) return sl::Term::null();
    const std::string& v = pool[pick(rng, pool.size())];
    refs.insert(v);
    return sl::Term::mk_var(v);
  };
  auto int_var = [&]() {
    std::string v = pick(rng, 2) ? "i" : "j";
    ints.insert(v);
    return v;
  };

  sl::SymHeap h;
  std::set<int64_t> consts{0};

  size_t npred = pick(rng, 3), npt = pick(rng, 2);
  size_t nalias = pick(rng, 3), narith = pick(rng, 3);
  if (npred + npt + nalias + narith == 0) npred = 1;

  for (size_t k = 0; k < npred; ++k) {
    sl::PredApp a;
    if (family == 0) {
      switch (pick(rng, 3)) {
        case 0:
          a.name = "sll";
          a.args = {sl::Arg(ref_term(false))};
          break;
        case 1:
          a.name = "eqlen";
          a.args = {sl::Arg(ref_term(true)), sl::Arg(ref_term(true))};
          break;
        default:
          a.name = "pow2seg";
          a.args = {sl::Arg(ref_term(false)), sl::Arg(ref_term(true)), sl::Arg(sl::Term::null())};
          if (pick(rng, 5) == 0)
            a.args[2] = sl::Arg(sl::LinExpr::variable(int_var()));
          else
            a.args[2] = sl::Arg(sl::LinExpr::constant(pick_in(rng, 0, 2)));
          break;
      }
    } else if (family == 1) {
      a.name = "dll";
      a.args = {sl::Arg(ref_term(false)), sl::Arg(ref_term(true))};
    } else {
      a.name = "bstsh";
      a.args = {sl::Arg(ref_term(false))};
    }
    h.spatial.push_back(std::move(a));
  }

  for (size_t k = 0; k < npt; ++k) {
    sl::PointsTo pt;
    pt.root = ref_term(false);
    pt.node_type = f.decl.name;
    int64_t c = pick_in(rng, -1, 1);
    consts.insert(c);
    pt.fields.push_back(sl::Arg(sl::LinExpr::constant(c)));
    for (size_t fi = 1; fi < f.decl.fields.size(); ++fi)
      pt.fields.push_back(sl::Arg(ref_term(true)));
    h.spatial.push_back(std::move(pt));
  }

  for (size_t k = 0; k < nalias; ++k) {
    sl::PureLit lit;
    lit.positive = pick(rng, 2) == 0;
    lit.lhs = ref_term(true);
    lit.rhs = ref_term(true);
    h.alias.push_back(lit);
  }

  for (size_t k = 0; k < narith; ++k) {
    sl::LinExpr e = sl::LinExpr::constant(pick_in(rng, -2, 2));
    size_t nv = 1 + pick(rng, 2);
    for (size_t t = 0; t < nv; ++t)
      e.add(sl::LinExpr::variable(int_var()), pick(rng, 2) ? 1 : -1);
    sl::ArithAtom at{pick(rng, 2) ? sl::ArithAtom::Op::Le : sl::ArithAtom::Op::Eq, e};
    h.arith = sl::Arith::mk_and(h.arith, sl::Arith::mk_atom(at));
  }

  f.heap = std::move(h);
  // Opposite-signed draws of the same variable cancel out of an atom, so
  // recompute the variable lists from what actually survived.
  std::set<std::string> free = sl::free_vars(f.heap);
  for (const auto& v : free) {
    if (ints.count(v))
      f.int_vars.push_back(v);
    else
      f.ref_vars.push_back(v);
  }
  f.payload_values.assign(consts.begin(), consts.end());
  return f;
}

AgreeOutcome check_agreement(const CorpusFormula& f, const AgreeOptions& opts,
                             std::string* diag) {
  auto note = [&](const std::string& s) {
    if (diag) *diag = s;
  };

  solver::CheckResult cr = solver::check_sat(f.heap, corpus_env(), opts.solver);
  if (cr.status == solver::SatResult::Unknown) {
    note("solver: unknown");
    return AgreeOutcome::Unknown;
  }

  if (cr.status == solver::SatResult::Sat) {
    try {
      il::ConcreteState st = state_of_model(cr.base, cr.model, {});
      // Variables that vanished during unfolding (a base case that never
      // mentions some formal) are unconstrained along the chosen disjunct;
      // any value completes the model.
      for (const auto& v : f.ref_vars) {
        auto it = cr.model.find(v);
        st.stack[v] = it == cr.model.end() ? il::Value::null() : it->second;
      }
      for (const auto& v : f.int_vars) {
        auto it = cr.model.find(v);
        st.stack[v] = it == cr.model.end() ? il::Value::integer(0) : it->second;
      }
      sl::Sat3 r = sl::satisfies(st, f.heap, corpus_env());
      if (r == sl::Sat3::Yes) return AgreeOutcome::SatValidated;
      note(std::string("model judged ") + sl::to_string(r) + " for " + f.heap.str());
      return AgreeOutcome::SatModelBad;
    } catch (const std::exception& e) {
      note(std::string("model rejected: ") + e.what() + " for " + f.heap.str());
      return AgreeOutcome::SatModelBad;
    }
  }

  // Unsat: scan for a countermodel, shrinking the cell cap until the state
  // count fits the budget.
  StateSpace sp;
  sp.decl = f.decl;
  sp.ref_vars = f.ref_vars;
  sp.int_vars = f.int_vars;
  sp.ints = f.payload_values;
  for (int64_t v = opts.stack_lo; v <= opts.stack_hi; ++v) sp.stack_ints.push_back(v);
  sp.dangling = true;
  sp.max_cells = opts.max_cells;
  while (sp.max_cells > 1) {
    uint64_t n = 0;
    enumerate_states(sp, [&](const il::ConcreteState&) { return ++n <= opts.state_budget; });
    if (n <= opts.state_budget) break;
    --sp.max_cells;
  }

  bool found = false, inconclusive = false;
  enumerate_states(sp, [&](const il::ConcreteState& st) {
    sl::Sat3 r = sl::satisfies(st, f.heap, corpus_env());
    if (r == sl::Sat3::Yes) {
      found = true;
      return false;
    }
    if (r == sl::Sat3::Unknown) inconclusive = true;
    return true;
  });
  if (found) {
    note("countermodel found for " + f.heap.str());
    return AgreeOutcome::UnsatRefuted;
  }
  if (inconclusive) {
    note("enumeration left unknowns for " + f.heap.str());
    return AgreeOutcome::Unknown;
  }
  return AgreeOutcome::UnsatConfirmed;
}

}  // namespace sepgen::oracle
