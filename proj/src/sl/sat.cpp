#include "sepgen/sl/sat.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

// Backtracking matcher for exact-footprint satisfaction.  Atoms are matched
// against the concrete heap one at a time; a points-to with a known root is
// deterministic, a predicate application expands into its disjuncts, and
// atoms whose roots are still unknown branch over candidate cells.  The
// search carries the set of still-unmatched cells, so ∗ is a partition by
// construction.

namespace sepgen::sl {

namespace {

using il::Loc;
using il::Value;

using Assignment = std::map<std::string, Value>;

bool value_eq(const Value& a, const Value& b) {
  if (a.is_null() && b.is_null()) return true;
  if (a.is_loc() && b.is_loc()) return a.as_loc().id == b.as_loc().id;
  if (a.is_int() && b.is_int()) return a.as_int() == b.as_int();
  if (a.is_bool() && b.is_bool()) return a.as_bool() == b.as_bool();
  return false;
}

struct Item {
  SpatialAtom atom;
  int depth = 0;  // predicate unfoldings that produced this atom
};

class Matcher {
 public:
  Matcher(const il::ConcreteState& st, const PredEnv& env, const SatOptions& opts)
      : st_(st), env_(env), opts_(opts) {}

  Sat3 run(const SymHeap& h, SatWitness* witness) {
    Assignment a;
    for (const auto& v : free_vars(h)) {
      auto it = st_.stack.find(v);
      if (it == st_.stack.end())
        throw std::invalid_argument("satisfies: no stack value for free variable '" + v + "'");
      a.emplace(v, it->second);
    }
    top_bound_.clear();
    for (const auto& b : h.bound) top_bound_.push_back(b.name);
    witness_ = witness;

    std::vector<Item> items;
    for (const auto& sa : h.spatial) items.push_back({sa, 0});
    std::set<Loc> remaining;
    for (const auto& [loc, rec] : st_.heap) {
      (void)rec;
      remaining.insert(loc);
    }
    std::vector<ArithPtr> ariths;
    if (h.arith && !h.arith->is_true()) ariths.push_back(h.arith);
    return match(items, a, remaining, h.alias, ariths);
  }

 private:
  // --- evaluation under a partial assignment -------------------------------

  bool term_ground(const Term& t, const Assignment& a) const {
    return t.is_null() || a.count(t.var) != 0;
  }
  Value term_value(const Term& t, const Assignment& a) const {
    return t.is_null() ? Value::null() : a.at(t.var);
  }

  static std::optional<int64_t> num_value(const Value& v) {
    if (v.is_int()) return v.as_int();
    if (v.is_bool()) return v.as_bool() ? 1 : 0;
    return std::nullopt;
  }

  // Evaluates a linear expression; nullopt when some variable is unassigned.
  std::optional<int64_t> lin_value(const LinExpr& e, const Assignment& a) const {
    __int128 acc = e.k;
    for (const auto& [v, c] : e.coeff) {
      auto it = a.find(v);
      if (it == a.end()) return std::nullopt;
      auto n = num_value(it->second);
      if (!n)
        throw std::invalid_argument("satisfies: variable '" + v +
                                    "' holds a reference but is used arithmetically");
      acc += static_cast<__int128>(c) * *n;
    }
    if (acc > INT64_MAX || acc < INT64_MIN)
      throw std::overflow_error("satisfies: arithmetic overflow while evaluating formula");
    return static_cast<int64_t>(acc);
  }

  // Evaluates an arithmetic tree; nullopt when underdetermined.
  std::optional<bool> arith_value(const ArithPtr& t, const Assignment& a) const {
    switch (t->kind) {
      case Arith::Kind::True: return true;
      case Arith::Kind::False: return false;
      case Arith::Kind::Atom: {
        auto v = lin_value(t->atom.expr, a);
        if (!v) return std::nullopt;
        return t->atom.op == ArithAtom::Op::Eq ? *v == 0 : *v <= 0;
      }
      case Arith::Kind::Not: {
        auto v = arith_value(t->a, a);
        if (!v) return std::nullopt;
        return !*v;
      }
      case Arith::Kind::And: {
        auto x = arith_value(t->a, a);
        auto y = arith_value(t->b, a);
        if (x && !*x) return false;
        if (y && !*y) return false;
        if (x && y) return true;
        return std::nullopt;
      }
      case Arith::Kind::Or: {
        auto x = arith_value(t->a, a);
        auto y = arith_value(t->b, a);
        if (x && *x) return true;
        if (y && *y) return true;
        if (x && y) return false;
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  // --- the search -----------------------------------------------------------

  Sat3 match(std::vector<Item> items, Assignment a, std::set<Loc> remaining,
             std::vector<PureLit> lits, std::vector<ArithPtr> ariths) {
    if (++steps_ > opts_.step_budget) return Sat3::Unknown;

    // Discharge the pure constraints that have become ground.
    {
      std::vector<PureLit> pending;
      for (const auto& l : lits) {
        if (term_ground(l.lhs, a) && term_ground(l.rhs, a)) {
          Value x = term_value(l.lhs, a), y = term_value(l.rhs, a);
          if ((x.is_int() || x.is_bool()) || (y.is_int() || y.is_bool()))
            throw std::invalid_argument("satisfies: reference literal over non-reference value");
          if (value_eq(x, y) != l.positive) return Sat3::No;
        } else {
          pending.push_back(l);
        }
      }
      lits = std::move(pending);
      std::vector<ArithPtr> apending;
      for (const auto& t : ariths) {
        auto v = arith_value(t, a);
        if (v) {
          if (!*v) return Sat3::No;
        } else {
          apending.push_back(t);
        }
      }
      ariths = std::move(apending);
    }

    if (items.empty()) {
      if (!remaining.empty()) return Sat3::No;
      if (!lits.empty() || !ariths.empty()) return Sat3::Unknown;  // underdetermined
      if (witness_) {
        witness_->bound_values.clear();
        for (const auto& n : top_bound_) {
          auto it = a.find(n);
          if (it != a.end()) witness_->bound_values.emplace(n, it->second);
        }
      }
      return Sat3::Yes;
    }

    // 1. A points-to with a known root is forced.
    for (size_t i = 0; i < items.size(); ++i) {
      const auto* p = std::get_if<PointsTo>(&items[i].atom);
      if (!p || !term_ground(p->root, a)) continue;
      Value rv = term_value(p->root, a);
      if (!rv.is_loc()) return Sat3::No;
      Loc loc = rv.as_loc();
      if (!remaining.count(loc)) return Sat3::No;
      const il::Record& rec = st_.heap.at(loc);
      if (rec.node_type != p->node_type) return Sat3::No;
      if (rec.fields.size() != p->fields.size()) return Sat3::No;
      bool underdetermined = false;
      for (size_t fi = 0; fi < p->fields.size(); ++fi) {
        const Value& fv = rec.fields[fi];
        if (const auto* t = std::get_if<Term>(&p->fields[fi])) {
          if (!fv.is_null() && !fv.is_loc()) return Sat3::No;  // sort mismatch
          if (term_ground(*t, a)) {
            if (!value_eq(term_value(*t, a), fv)) return Sat3::No;
          } else {
            a.emplace(t->var, fv);
          }
        } else {
          const auto& e = std::get<LinExpr>(p->fields[fi]);
          auto fnum = num_value(fv);
          if (!fnum) return Sat3::No;  // record holds a reference here
          // Split into the known part and unassigned variables.
          __int128 known = e.k;
          std::vector<std::pair<std::string, int64_t>> open;
          for (const auto& [v, c] : e.coeff) {
            auto it = a.find(v);
            if (it == a.end()) {
              open.emplace_back(v, c);
            } else {
              auto n = num_value(it->second);
              if (!n)
                throw std::invalid_argument("satisfies: variable '" + v +
                                            "' holds a reference but is used arithmetically");
              known += static_cast<__int128>(c) * *n;
            }
          }
          if (open.empty()) {
            if (known != *fnum) return Sat3::No;
          } else if (open.size() == 1) {
            __int128 delta = static_cast<__int128>(*fnum) - known;
            int64_t c = open[0].second;
            if (delta % c != 0) return Sat3::No;
            a.emplace(open[0].first, Value::integer(static_cast<int64_t>(delta / c)));
          } else {
            underdetermined = true;  // can't invert two unknowns from one cell
          }
        }
      }
      if (underdetermined) return Sat3::Unknown;
      remaining.erase(loc);
      items.erase(items.begin() + static_cast<long>(i));
      return match(std::move(items), std::move(a), std::move(remaining), std::move(lits),
                   std::move(ariths));
    }

    // 2. Expand a predicate application whose reference arguments are known.
    for (size_t i = 0; i < items.size(); ++i) {
      const auto* p = std::get_if<PredApp>(&items[i].atom);
      if (!p) continue;
      bool ptr_ground = true;
      for (const auto& arg : p->args) {
        if (const auto* t = std::get_if<Term>(&arg))
          if (!term_ground(*t, a)) ptr_ground = false;
      }
      if (!ptr_ground) continue;
      const PredicateDef* def = env_.find(p->name);
      if (!def) throw std::invalid_argument("satisfies: unknown predicate '" + p->name + "'");
      int depth = items[i].depth;
      if (depth + 1 > opts_.unfold_budget) return Sat3::Unknown;
      PredApp app = *p;
      std::vector<Item> rest = items;
      rest.erase(rest.begin() + static_cast<long>(i));
      bool unknown = false;
      for (const auto& disjunct : def->body) {
        SymHeap inst = instantiate(disjunct, *def, app);
        std::vector<Item> next = rest;
        for (const auto& sa : inst.spatial) next.push_back({sa, depth + 1});
        std::vector<PureLit> nlits = lits;
        nlits.insert(nlits.end(), inst.alias.begin(), inst.alias.end());
        std::vector<ArithPtr> nariths = ariths;
        if (inst.arith && !inst.arith->is_true()) nariths.push_back(inst.arith);
        Sat3 r = match(std::move(next), a, remaining, std::move(nlits), std::move(nariths));
        if (r == Sat3::Yes) return Sat3::Yes;
        if (r == Sat3::Unknown) unknown = true;
      }
      return unknown ? Sat3::Unknown : Sat3::No;
    }

    // 3. A points-to with an unknown root: try each unmatched cell of the
    //    right record type.
    for (size_t i = 0; i < items.size(); ++i) {
      const auto* p = std::get_if<PointsTo>(&items[i].atom);
      if (!p) continue;
      bool unknown = false;
      for (Loc loc : remaining) {
        if (st_.heap.at(loc).node_type != p->node_type) continue;
        Assignment na = a;
        na.emplace(p->root.var, Value::loc(loc));
        Sat3 r = match(items, std::move(na), remaining, lits, ariths);
        if (r == Sat3::Yes) return Sat3::Yes;
        if (r == Sat3::Unknown) unknown = true;
      }
      return unknown ? Sat3::Unknown : Sat3::No;
    }

    // 4. Only predicate applications with unknown reference arguments remain:
    //    guess the first unknown argument over null and the unmatched cells.
    for (size_t i = 0; i < items.size(); ++i) {
      const auto* p = std::get_if<PredApp>(&items[i].atom);
      if (!p) continue;
      for (const auto& arg : p->args) {
        const auto* t = std::get_if<Term>(&arg);
        if (!t || term_ground(*t, a)) continue;
        bool unknown = false;
        std::vector<Value> candidates;
        candidates.push_back(Value::null());
        for (Loc loc : remaining) candidates.push_back(Value::loc(loc));
        for (const auto& v : candidates) {
          Assignment na = a;
          na.emplace(t->var, v);
          Sat3 r = match(items, std::move(na), remaining, lits, ariths);
          if (r == Sat3::Yes) return Sat3::Yes;
          if (r == Sat3::Unknown) unknown = true;
        }
        return unknown ? Sat3::Unknown : Sat3::No;
      }
    }
    // Unreachable: one of the cases above always applies to a nonempty list.
    return Sat3::Unknown;
  }

  // Builds one disjunct of a definition with formals replaced by actuals and
  // existentials renamed to matcher-internal names ('?' cannot appear in
  // user identifiers).
  SymHeap instantiate(const SymHeap& disjunct, const PredicateDef& def, const PredApp& app) {
    SymHeap d = disjunct;
    std::map<std::string, Arg> ren;
    std::vector<TypedVar> nb;
    for (const auto& b : d.bound) {
      std::string q = "?" + std::to_string(++qcount_);
      ren.emplace(b.name, b.sort.is_ptr() ? Arg{Term::mk_var(q)} : Arg{LinExpr::variable(q)});
      nb.push_back({q, b.sort});
    }
    d.bound.clear();
    if (!ren.empty()) d = substitute_many(d, ren);
    std::map<std::string, Arg> sub;
    for (size_t i = 0; i < def.formals.size(); ++i) sub.emplace(def.formals[i].name, app.args[i]);
    d = substitute_many(d, sub);
    d.bound = std::move(nb);
    return d;
  }

  const il::ConcreteState& st_;
  const PredEnv& env_;
  SatOptions opts_;
  uint64_t steps_ = 0;
  uint64_t qcount_ = 0;
  std::vector<std::string> top_bound_;
  SatWitness* witness_ = nullptr;
};

}  // namespace

Sat3 satisfies(const il::ConcreteState& state, const SymHeap& h, const PredEnv& env,
               const SatOptions& opts, SatWitness* witness) {
  Matcher m(state, env, opts);
  return m.run(h, witness);
}

Sat3 satisfies(const il::ConcreteState& state, const Formula& f, const PredEnv& env,
               const SatOptions& opts, SatWitness* witness) {
  bool unknown = false;
  for (const auto& h : f) {
    Sat3 r = satisfies(state, h, env, opts, witness);
    if (r == Sat3::Yes) return Sat3::Yes;
    if (r == Sat3::Unknown) unknown = true;
  }
  return unknown ? Sat3::Unknown : Sat3::No;
}

}  // namespace sepgen::sl
