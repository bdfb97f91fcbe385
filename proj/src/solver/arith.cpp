#include "sepgen/solver/arith.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

namespace sepgen::solver {

namespace {

using sl::Arith;
using sl::ArithAtom;
using sl::ArithPtr;
using sl::LinExpr;

using i128 = __int128;

int64_t clamp64(i128 v) {
  if (v > INT64_MAX) return INT64_MAX;
  if (v < INT64_MIN) return INT64_MIN;
  return static_cast<int64_t>(v);
}

// Floor/ceil division with positive divisor.
i128 floordiv(i128 a, i128 b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
i128 ceildiv(i128 a, i128 b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }

struct Iv {
  std::optional<int64_t> lo, hi;
  bool empty() const { return lo && hi && *lo > *hi; }
};

using Box = std::map<std::string, Iv>;

std::set<std::string> atom_vars(const AtomConj& atoms) {
  std::set<std::string> vs;
  for (const auto& at : atoms)
    for (const auto& [v, c] : at.expr.coeff) {
      (void)c;
      vs.insert(v);
    }
  return vs;
}

// One propagation pass for `expr <= 0`; returns true if some bound tightened.
bool tighten_le(const LinExpr& e, Box& box) {
  bool changed = false;
  for (const auto& [vj, cj] : e.coeff) {
    // c_j v_j <= -k - sum of min(c_i v_i) over i != j
    i128 bound = -static_cast<i128>(e.k);
    bool finite = true;
    for (const auto& [vi, ci] : e.coeff) {
      if (vi == vj) continue;
      const Iv& iv = box[vi];
      if (ci > 0) {
        if (!iv.lo) { finite = false; break; }
        bound -= static_cast<i128>(ci) * *iv.lo;
      } else {
        if (!iv.hi) { finite = false; break; }
        bound -= static_cast<i128>(ci) * *iv.hi;
      }
    }
    if (!finite) continue;
    Iv& iv = box[vj];
    if (cj > 0) {
      int64_t nh = clamp64(floordiv(bound, cj));
      if (!iv.hi || nh < *iv.hi) {
        iv.hi = nh;
        changed = true;
      }
    } else {
      int64_t nl = clamp64(ceildiv(-bound, -static_cast<i128>(cj)));
      if (!iv.lo || nl > *iv.lo) {
        iv.lo = nl;
        changed = true;
      }
    }
  }
  return changed;
}

// Sound interval propagation; returns false when some interval is empty.
bool propagate(const AtomConj& atoms, Box& box) {
  for (int round = 0; round < 200; ++round) {
    bool changed = false;
    for (const auto& at : atoms) {
      if (at.expr.coeff.empty()) {
        // Ground atom.
        bool ok = at.op == ArithAtom::Op::Eq ? at.expr.k == 0 : at.expr.k <= 0;
        if (!ok) return false;
        continue;
      }
      changed |= tighten_le(at.expr, box);
      if (at.op == ArithAtom::Op::Eq) changed |= tighten_le(at.expr.negated(), box);
    }
    for (const auto& [v, iv] : box) {
      (void)v;
      if (iv.empty()) return false;
    }
    if (!changed) return true;
  }
  return true;  // fixpoint not reached; intervals are still sound
}

// Substitute v := rhs into e; v's coefficient is folded away.
void subst_var(LinExpr& e, const std::string& v, const LinExpr& rhs) {
  auto it = e.coeff.find(v);
  if (it == e.coeff.end()) return;
  i128 c = it->second;
  e.coeff.erase(it);
  for (const auto& [w, cw] : rhs.coeff) {
    i128 nc = static_cast<i128>(e.coeff[w]) + c * cw;
    if (nc > INT64_MAX || nc < INT64_MIN)
      throw std::overflow_error("arithmetic overflow during elimination");
    if (nc == 0)
      e.coeff.erase(w);
    else
      e.coeff[w] = static_cast<int64_t>(nc);
  }
  i128 nk = static_cast<i128>(e.k) + c * rhs.k;
  if (nk > INT64_MAX || nk < INT64_MIN)
    throw std::overflow_error("arithmetic overflow during elimination");
  e.k = static_cast<int64_t>(nk);
}

struct Elim {
  std::string var;
  LinExpr rhs;  // over variables that survive the whole elimination
};

// Removes equalities that bind a variable with coefficient +-1, substituting
// the variable away.  Exact over Z: solutions of the reduced system extend
// uniquely to solutions of the original, so Unsat/Sat verdicts transfer.
// Interval propagation alone cannot see such contradictions when the
// variables involved are unbounded.
std::vector<Elim> eliminate_units(AtomConj& atoms) {
  std::vector<Elim> elims;
  bool again = true;
  while (again) {
    again = false;
    for (size_t i = 0; i < atoms.size(); ++i) {
      const ArithAtom& at = atoms[i];
      if (at.op != ArithAtom::Op::Eq) continue;
      auto uit = std::find_if(
          at.expr.coeff.begin(), at.expr.coeff.end(),
          [](const auto& p) { return p.second == 1 || p.second == -1; });
      if (uit == at.expr.coeff.end()) continue;
      std::string v = uit->first;
      int64_t c = uit->second;
      LinExpr rhs = at.expr;
      rhs.coeff.erase(v);
      if (c == 1) rhs = rhs.negated();  // c = -1 solves to rhs directly
      atoms.erase(atoms.begin() + i);
      for (auto& other : atoms) subst_var(other.expr, v, rhs);
      for (auto& e : elims) subst_var(e.rhs, v, rhs);
      elims.push_back({std::move(v), std::move(rhs)});
      again = true;
      break;
    }
  }
  return elims;
}

struct Enumerator {
  const ArithOptions& opts;
  std::vector<std::string> vars;
  uint64_t nodes = 0;
  bool cut = false;

  explicit Enumerator(const ArithOptions& o) : opts(o) {}

  // Substitute v := value into every atom.
  static AtomConj assign(const AtomConj& atoms, const std::string& v, int64_t value) {
    AtomConj out;
    out.reserve(atoms.size());
    for (const auto& at : atoms) {
      ArithAtom n = at;
      auto it = n.expr.coeff.find(v);
      if (it != n.expr.coeff.end()) {
        i128 nk = static_cast<i128>(n.expr.k) + static_cast<i128>(it->second) * value;
        if (nk > INT64_MAX || nk < INT64_MIN)
          throw std::overflow_error("arithmetic overflow during search");
        n.expr.k = static_cast<int64_t>(nk);
        n.expr.coeff.erase(v);
      }
      out.push_back(std::move(n));
    }
    return out;
  }

  bool dfs(size_t idx, const AtomConj& atoms, std::map<std::string, int64_t>& model) {
    if (++nodes > opts.node_budget) {
      cut = true;
      return false;
    }
    Box box;
    if (!propagate(atoms, box)) return false;
    if (idx == vars.size()) return true;  // all atoms ground and satisfied
    const std::string& v = vars[idx];
    const Iv& iv = box[v];
    int64_t lo = std::max(iv.lo.value_or(opts.int_lo), opts.int_lo);
    int64_t hi = std::min(iv.hi.value_or(opts.int_hi), opts.int_hi);
    // Values ordered by (|v|, v): 0, -1, 1, -2, 2, ...
    std::vector<int64_t> cands;
    for (i128 m = 0; !(-m < lo && m > hi); ++m) {
      if (m == 0) {
        if (lo <= 0 && 0 <= hi) cands.push_back(0);
      } else {
        if (-m >= lo && -m <= hi) cands.push_back(static_cast<int64_t>(-m));
        if (m >= lo && m <= hi) cands.push_back(static_cast<int64_t>(m));
      }
    }
    for (int64_t cand : cands) {
      model[v] = cand;
      if (dfs(idx + 1, assign(atoms, v, cand), model)) return true;
      if (cut) return false;
    }
    model.erase(v);
    return false;
  }
};

}  // namespace

std::vector<AtomConj> to_dnf(const sl::ArithPtr& t) {
  // Recursive NNF + distribution.  Branch count is capped: pathological
  // inputs are rejected rather than silently truncated.
  constexpr size_t kMaxBranches = 20000;
  struct Impl {
    std::vector<AtomConj> go(const ArithPtr& n, bool neg) {
      switch (n->kind) {
        case Arith::Kind::True: return neg ? none() : all();
        case Arith::Kind::False: return neg ? all() : none();
        case Arith::Kind::Atom: {
          if (!neg) return {{n->atom}};
          if (n->atom.op == ArithAtom::Op::Le) {
            // !(e <= 0)  <=>  -e + 1 <= 0
            LinExpr e = n->atom.expr.negated();
            e.add(LinExpr::constant(1));
            return {{ArithAtom{ArithAtom::Op::Le, e}}};
          }
          // !(e = 0)  <=>  e + 1 <= 0  \/  -e + 1 <= 0
          LinExpr a = n->atom.expr;
          a.add(LinExpr::constant(1));
          LinExpr b = n->atom.expr.negated();
          b.add(LinExpr::constant(1));
          return {{ArithAtom{ArithAtom::Op::Le, a}}, {ArithAtom{ArithAtom::Op::Le, b}}};
        }
        case Arith::Kind::Not: return go(n->a, !neg);
        case Arith::Kind::And:
        case Arith::Kind::Or: {
          bool conj = (n->kind == Arith::Kind::And) != neg;
          auto l = go(n->a, neg), r = go(n->b, neg);
          if (!conj) {
            l.insert(l.end(), r.begin(), r.end());
            return l;
          }
          std::vector<AtomConj> out;
          if (l.size() * r.size() > kMaxBranches)
            throw std::runtime_error("arithmetic constraint too large to normalize");
          for (const auto& x : l)
            for (const auto& y : r) {
              AtomConj m = x;
              m.insert(m.end(), y.begin(), y.end());
              out.push_back(std::move(m));
            }
          return out;
        }
      }
      return none();
    }
    static std::vector<AtomConj> all() { return {AtomConj{}}; }
    static std::vector<AtomConj> none() { return {}; }
  };
  return Impl{}.go(t, false);
}

bool conj_refuted(const AtomConj& atoms) {
  AtomConj reduced = atoms;
  try {
    eliminate_units(reduced);
  } catch (const std::overflow_error&) {
    reduced = atoms;
  }
  Box box;
  return !propagate(reduced, box);
}

ArithResult solve_conj(const AtomConj& atoms0, const ArithOptions& opts) {
  ArithResult res;
  AtomConj atoms = atoms0;
  std::vector<Elim> elims;
  try {
    elims = eliminate_units(atoms);
  } catch (const std::overflow_error&) {
    atoms = atoms0;
    elims.clear();
  }
  Box box;
  if (!propagate(atoms, box)) {
    res.status = ArithStatus::Unsat;  // interval emptiness is a proof over Z
    return res;
  }
  // The enumeration is exhaustive iff the propagated intervals fit inside the
  // search window for every variable.
  auto vars = atom_vars(atoms);
  bool complete = true;
  for (const auto& v : vars) {
    const Iv& iv = box[v];
    if (!iv.lo || !iv.hi || *iv.lo < opts.int_lo || *iv.hi > opts.int_hi) complete = false;
  }
  Enumerator en(opts);
  en.vars.assign(vars.begin(), vars.end());
  std::map<std::string, int64_t> model;
  bool found;
  try {
    found = en.dfs(0, atoms, model);
  } catch (const std::overflow_error&) {
    res.status = ArithStatus::Unknown;
    return res;
  }
  if (found) {
    // Values for the eliminated variables follow from their bindings; the
    // enumerator never saw them.  Binding variables absent from every
    // surviving atom are unconstrained and read as 0.
    for (const auto& e : elims) {
      i128 val = e.rhs.k;
      for (const auto& [w, c] : e.rhs.coeff) {
        auto wit = model.find(w);
        if (wit == model.end()) wit = model.emplace(w, 0).first;
        val += static_cast<i128>(c) * wit->second;
      }
      if (val > INT64_MAX || val < INT64_MIN) {
        res.status = ArithStatus::Unknown;  // a model exists, but not in i64
        return res;
      }
      model[e.var] = static_cast<int64_t>(val);
    }
    res.status = ArithStatus::Sat;
    res.model = std::move(model);
    return res;
  }
  res.status = (complete && !en.cut) ? ArithStatus::Unsat : ArithStatus::Unknown;
  return res;
}

ArithResult solve_arith(const sl::ArithPtr& t, const ArithOptions& opts) {
  std::vector<AtomConj> branches;
  try {
    branches = to_dnf(t);
  } catch (const std::runtime_error&) {
    return {ArithStatus::Unknown, {}};
  }
  bool unknown = false;
  for (const auto& b : branches) {
    ArithResult r = solve_conj(b, opts);
    if (r.status == ArithStatus::Sat) return r;
    if (r.status == ArithStatus::Unknown) unknown = true;
  }
  return {unknown ? ArithStatus::Unknown : ArithStatus::Unsat, {}};
}

}  // namespace sepgen::solver
