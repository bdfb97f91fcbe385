#include "sepgen/solver/base.hpp"

#include <algorithm>
#include <set>

#include "sepgen/solver/pure.hpp"
#include "sepgen/solver/solver.hpp"

namespace sepgen::solver {

namespace {

// Top-level conjunctive atoms of an arithmetic tree.
void conj_atoms(const sl::ArithPtr& t, std::vector<sl::ArithAtom>& out) {
  if (!t) return;
  if (t->kind == sl::Arith::Kind::Atom) out.push_back(t->atom);
  else if (t->kind == sl::Arith::Kind::And) {
    conj_atoms(t->a, out);
    conj_atoms(t->b, out);
  }
}

struct Fact {
  sl::SymHeap heap;
  // Every cell of the originating expansion is rooted at a formal, so the
  // fact loses no spatial content and is a sound extra disjunct.
  bool lossless = false;
};

// Projects a predicate-free heap onto the formals of `def`.  Only literals
// not already implied by the fact built so far are added, so the result is
// irredundant (and in particular reproduces a plain base case verbatim).
Fact abstract_fact(const sl::SymHeap& g, const sl::PredicateDef& def) {
  Congruence c(g);
  Fact fact;
  sl::SymHeap& out = fact.heap;
  int wild = 0;

  // Allocation status, one cell per allocated formal class, with fresh
  // unconstrained fields.
  std::set<std::string> emitted_classes;
  size_t g_cells = 0;
  for (const auto& sa : g.spatial)
    if (std::holds_alternative<sl::PointsTo>(sa)) ++g_cells;
  for (const auto& f : def.formals) {
    if (!f.sort.is_ptr()) continue;
    sl::Term ft = sl::Term::mk_var(f.name);
    if (emitted_classes.count(c.find(ft))) continue;  // aliased formal
    for (const auto& sa : g.spatial) {
      const auto* p = std::get_if<sl::PointsTo>(&sa);
      if (!p || !c.same(p->root, ft)) continue;
      sl::PointsTo cell;
      cell.root = ft;
      cell.node_type = p->node_type;
      for (const auto& arg : p->fields) {
        std::string w = "w" + std::to_string(++wild);
        if (std::holds_alternative<sl::Term>(arg)) {
          cell.fields.push_back(sl::Term::mk_var(w));
          out.bound.push_back({w, sl::Sort::ptr()});
        } else {
          cell.fields.push_back(sl::LinExpr::variable(w));
          out.bound.push_back({w, sl::Sort::integer()});
        }
      }
      out.spatial.push_back(std::move(cell));
      emitted_classes.insert(c.find(ft));
      break;
    }
  }
  fact.lossless = emitted_classes.size() == g_cells;

  // Implied equalities over formals and null, irredundantly.  Null
  // equalities come first so that e.g. {a = null, b = null} is preferred
  // over the equivalent {a = null, a = b}, matching how base cases are
  // conventionally written.
  auto add_lit = [&](const sl::PureLit& l) {
    if (pure_implies(g, l) && !pure_implies(out, l)) out.alias.push_back(l);
  };
  for (const auto& f : def.formals)
    if (f.sort.is_ptr())
      add_lit({true, sl::Term::mk_var(f.name), sl::Term::null()});
  for (size_t i = 0; i < def.formals.size(); ++i) {
    if (!def.formals[i].sort.is_ptr()) continue;
    for (size_t j = i + 1; j < def.formals.size(); ++j) {
      if (!def.formals[j].sort.is_ptr()) continue;
      add_lit({true, sl::Term::mk_var(def.formals[i].name),
               sl::Term::mk_var(def.formals[j].name)});
    }
  }

  // Arithmetic over the formals alone, deduplicated, in a canonical order.
  std::set<std::string> fnames;
  for (const auto& f : def.formals) fnames.insert(f.name);
  std::vector<sl::ArithAtom> atoms;
  conj_atoms(g.arith, atoms);
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  for (const auto& at : atoms) {
    if (at.expr.coeff.empty()) continue;  // ground; refutation already ran
    bool formal_only = true;
    for (const auto& [v, cf] : at.expr.coeff) {
      (void)cf;
      if (!fnames.count(v)) formal_only = false;
    }
    if (formal_only) conjoin(out, sl::Arith::mk_atom(at));
  }

  // Implied disequalities the fact does not already exhibit (an allocated
  // root is trivially non-null and separate from other roots).
  for (size_t i = 0; i < def.formals.size(); ++i) {
    if (!def.formals[i].sort.is_ptr()) continue;
    sl::Term a = sl::Term::mk_var(def.formals[i].name);
    add_lit({false, a, sl::Term::null()});
    for (size_t j = i + 1; j < def.formals.size(); ++j) {
      if (!def.formals[j].sort.is_ptr()) continue;
      add_lit({false, a, sl::Term::mk_var(def.formals[j].name)});
    }
  }
  return fact;
}

std::map<std::string, std::vector<Fact>> derive_facts(const sl::PredEnv& env) {
  std::map<std::string, std::vector<Fact>> facts;
  std::map<std::string, std::set<std::string>> seen;  // canonical strings

  for (int round = 0; round < 8; ++round) {
    bool changed = false;
    for (const auto& [name, def] : env.defs) {
      for (const auto& d : def.body) {
        // Replace every application with every combination of known facts.
        std::vector<sl::SymHeap> work{d}, ready;
        uint64_t next_occ = 1;
        for (auto& sa : work[0].spatial)
          if (auto* pa = std::get_if<sl::PredApp>(&sa)) pa->occ_id = next_occ++;
        while (!work.empty()) {
          if (ready.size() + work.size() > 512) break;  // combination guard
          sl::SymHeap h = std::move(work.back());
          work.pop_back();
          const sl::PredApp* occ = nullptr;
          for (const auto& sa : h.spatial)
            if (const auto* pa = std::get_if<sl::PredApp>(&sa)) {
              occ = pa;
              break;
            }
          if (!occ) {
            ready.push_back(std::move(h));
            continue;
          }
          auto it = facts.find(occ->name);
          if (it == facts.end() || it->second.empty()) continue;
          // A one-disjunct definition turns `unfold` into exactly the
          // replace-by-fact step, sharing freshening and substitution.
          const sl::PredicateDef* orig = env.find(occ->name);
          if (!orig) continue;
          for (const auto& fact : it->second) {
            sl::PredEnv one;
            sl::PredicateDef pd;
            pd.name = occ->name;
            pd.formals = orig->formals;
            pd.body = {fact.heap};
            one.defs.emplace(pd.name, std::move(pd));
            auto rs = sl::unfold(h, occ->occ_id, one, &next_occ);
            for (auto& r : rs) work.push_back(std::move(r));
          }
        }
        for (const auto& g : ready) {
          if (pure_refuted(g)) continue;
          Fact fact = abstract_fact(g, def);
          if (seen[name].insert(fact.heap.str()).second) {
            facts[name].push_back(std::move(fact));
            changed = true;
          }
        }
      }
    }
    if (!changed) break;
  }
  return facts;
}

}  // namespace

sl::Formula base_formulas(const std::string& pred, const sl::PredEnv& env) {
  auto facts = derive_facts(env);
  sl::Formula out;
  auto it = facts.find(pred);
  if (it != facts.end())
    for (const auto& f : it->second) out.push_back(f.heap);
  return out;
}

sl::PredEnv augment_env(const sl::PredEnv& env) {
  auto facts = derive_facts(env);
  sl::PredEnv out = env;
  for (auto& [name, def] : out.defs) {
    auto it = facts.find(name);
    if (it == facts.end()) continue;
    std::set<std::string> existing;
    for (const auto& d : def.body) existing.insert(d.str());
    for (const auto& fact : it->second) {
      if (!fact.lossless) continue;          // dropped cells: would widen
      if (fact.heap.alias.empty()) continue;  // allocation/arithmetic only
      if (existing.count(fact.heap.str())) continue;
      def.body.push_back(fact.heap);
      existing.insert(fact.heap.str());
    }
  }
  classify_well_founded(out);
  return out;
}

}  // namespace sepgen::solver
