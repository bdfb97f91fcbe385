#include "sepgen/sl/formula.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace sepgen::sl {

// ---------------------------------------------------------------------------
// LinExpr

LinExpr& LinExpr::add(const LinExpr& o, int64_t scale) {
  for (const auto& [v, c] : o.coeff) {
    int64_t& slot = coeff[v];
    slot += c * scale;
    if (slot == 0) coeff.erase(v);
  }
  k += o.k * scale;
  return *this;
}

LinExpr LinExpr::negated() const {
  LinExpr r;
  r.k = -k;
  for (const auto& [v, c] : coeff) r.coeff[v] = -c;
  return r;
}

std::string LinExpr::str() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [v, c] : coeff) {
    if (c >= 0 && !first) os << "+";
    if (c == -1) os << "-";
    else if (c != 1) os << c << "*";
    os << v;
    first = false;
  }
  if (k != 0 || first) {
    if (k >= 0 && !first) os << "+";
    os << k;
  }
  return os.str();
}

std::string ArithAtom::str() const {
  return expr.str() + (op == Op::Eq ? " = 0" : " <= 0");
}

// ---------------------------------------------------------------------------
// Arith trees

ArithPtr Arith::truth() {
  static const ArithPtr t = std::make_shared<Arith>(Arith{Kind::True, {}, nullptr, nullptr});
  return t;
}
ArithPtr Arith::falsity() {
  static const ArithPtr f = std::make_shared<Arith>(Arith{Kind::False, {}, nullptr, nullptr});
  return f;
}
ArithPtr Arith::mk_atom(ArithAtom at) {
  return std::make_shared<Arith>(Arith{Kind::Atom, std::move(at), nullptr, nullptr});
}
ArithPtr Arith::mk_not(ArithPtr x) {
  if (x->kind == Kind::True) return falsity();
  if (x->kind == Kind::False) return truth();
  return std::make_shared<Arith>(Arith{Kind::Not, {}, std::move(x), nullptr});
}
ArithPtr Arith::mk_and(ArithPtr x, ArithPtr y) {
  if (x->kind == Kind::True) return y;
  if (y->kind == Kind::True) return x;
  if (x->kind == Kind::False || y->kind == Kind::False) return falsity();
  return std::make_shared<Arith>(Arith{Kind::And, {}, std::move(x), std::move(y)});
}
ArithPtr Arith::mk_or(ArithPtr x, ArithPtr y) {
  if (x->kind == Kind::False) return y;
  if (y->kind == Kind::False) return x;
  if (x->kind == Kind::True || y->kind == Kind::True) return truth();
  return std::make_shared<Arith>(Arith{Kind::Or, {}, std::move(x), std::move(y)});
}

std::string Arith::str() const {
  switch (kind) {
    case Kind::True: return "true";
    case Kind::False: return "false";
    case Kind::Atom: return atom.str();
    case Kind::Not: return "!(" + a->str() + ")";
    case Kind::And: return "(" + a->str() + " & " + b->str() + ")";
    case Kind::Or: return "(" + a->str() + " | " + b->str() + ")";
  }
  return "?";
}

bool arith_equal(const ArithPtr& a, const ArithPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Arith::Kind::True:
    case Arith::Kind::False: return true;
    case Arith::Kind::Atom: return a->atom == b->atom;
    case Arith::Kind::Not: return arith_equal(a->a, b->a);
    case Arith::Kind::And:
    case Arith::Kind::Or:
      return arith_equal(a->a, b->a) && arith_equal(a->b, b->b);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Printers

std::string arg_str(const Arg& a) {
  if (std::holds_alternative<Term>(a)) return std::get<Term>(a).str();
  return std::get<LinExpr>(a).str();
}
bool arg_is_ptr(const Arg& a) { return std::holds_alternative<Term>(a); }

std::string PointsTo::str() const {
  std::string s = root.str() + "->" + node_type + "{";
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) s += ",";
    s += arg_str(fields[i]);
  }
  return s + "}";
}

std::string PredApp::str() const {
  std::string s = name + "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) s += ",";
    s += arg_str(args[i]);
  }
  s += ")";
  if (marked) s += "'";
  return s;
}

bool SymHeap::has_preds() const {
  for (const auto& a : spatial)
    if (std::holds_alternative<PredApp>(a)) return true;
  return false;
}

std::string SymHeap::str() const {
  std::ostringstream os;
  if (!bound.empty()) {
    os << "ex ";
    for (size_t i = 0; i < bound.size(); ++i) os << (i ? "," : "") << bound[i].name;
    os << ". ";
  }
  if (spatial.empty()) {
    os << "emp";
  } else {
    for (size_t i = 0; i < spatial.size(); ++i) {
      if (i) os << " * ";
      std::visit([&](const auto& x) { os << x.str(); }, spatial[i]);
    }
  }
  for (const auto& l : alias) os << " & " << l.str();
  if (arith && arith->kind != Arith::Kind::True) os << " & " << arith->str();
  return os.str();
}

std::string formula_str(const Formula& f) {
  std::string s;
  for (size_t i = 0; i < f.size(); ++i) {
    if (i) s += " \\/ ";
    s += f[i].str();
  }
  return s;
}

// ---------------------------------------------------------------------------
// Variable collection

namespace {

void vars_of_term(const Term& t, std::set<std::string>& out) {
  if (t.is_var()) out.insert(t.var);
}
void vars_of_lin(const LinExpr& e, std::set<std::string>& out) {
  for (const auto& [v, c] : e.coeff) {
    (void)c;
    out.insert(v);
  }
}
void vars_of_arg(const Arg& a, std::set<std::string>& out) {
  if (std::holds_alternative<Term>(a)) vars_of_term(std::get<Term>(a), out);
  else vars_of_lin(std::get<LinExpr>(a), out);
}
void vars_of_arith(const ArithPtr& a, std::set<std::string>& out) {
  if (!a) return;
  if (a->kind == Arith::Kind::Atom) vars_of_lin(a->atom.expr, out);
  vars_of_arith(a->a, out);
  vars_of_arith(a->b, out);
}

}  // namespace

void collect_all_vars(const SymHeap& h, std::set<std::string>& out) {
  for (const auto& b : h.bound) out.insert(b.name);
  for (const auto& sa : h.spatial) {
    if (std::holds_alternative<PointsTo>(sa)) {
      const auto& p = std::get<PointsTo>(sa);
      vars_of_term(p.root, out);
      for (const auto& f : p.fields) vars_of_arg(f, out);
    } else {
      for (const auto& f : std::get<PredApp>(sa).args) vars_of_arg(f, out);
    }
  }
  for (const auto& l : h.alias) {
    vars_of_term(l.lhs, out);
    vars_of_term(l.rhs, out);
  }
  vars_of_arith(h.arith, out);
}

std::set<std::string> free_vars(const SymHeap& h) {
  std::set<std::string> all;
  collect_all_vars(h, all);
  for (const auto& b : h.bound) all.erase(b.name);
  return all;
}

std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> out;
  for (const auto& h : f) {
    auto fv = free_vars(h);
    out.insert(fv.begin(), fv.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Freshening

std::string fresh_name(const std::string& base, const std::set<std::string>& used) {
  if (!used.count(base)) return base;
  // Strip a numeric suffix so "n1" renames to "n3" rather than "n11".
  size_t cut = base.size();
  while (cut > 0 && std::isdigit(static_cast<unsigned char>(base[cut - 1]))) --cut;
  std::string stem = cut == 0 ? base : base.substr(0, cut);
  if (stem.empty()) stem = "v";
  for (int i = 1;; ++i) {
    std::string cand = stem + std::to_string(i);
    if (!used.count(cand)) return cand;
  }
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

using Subst = std::map<std::string, Arg>;

Term subst_term(const Term& t, const Subst& s) {
  if (!t.is_var()) return t;
  auto it = s.find(t.var);
  if (it == s.end()) return t;
  if (!std::holds_alternative<Term>(it->second))
    throw std::runtime_error("sort error: integer expression substituted into reference position of '" +
                             t.var + "'");
  return std::get<Term>(it->second);
}

LinExpr subst_lin(const LinExpr& e, const Subst& s) {
  LinExpr r;
  r.k = e.k;
  for (const auto& [v, c] : e.coeff) {
    auto it = s.find(v);
    if (it == s.end()) {
      r.add(LinExpr::variable(v), c);
    } else if (std::holds_alternative<LinExpr>(it->second)) {
      r.add(std::get<LinExpr>(it->second), c);
    } else {
      throw std::runtime_error("sort error: reference term substituted into integer position of '" +
                               v + "'");
    }
  }
  return r;
}

Arg subst_arg(const Arg& a, const Subst& s) {
  if (std::holds_alternative<Term>(a)) return subst_term(std::get<Term>(a), s);
  return subst_lin(std::get<LinExpr>(a), s);
}

ArithPtr subst_arith(const ArithPtr& a, const Subst& s) {
  if (!a) return a;
  switch (a->kind) {
    case Arith::Kind::True:
    case Arith::Kind::False: return a;
    case Arith::Kind::Atom: {
      ArithAtom at = a->atom;
      at.expr = subst_lin(at.expr, s);
      return Arith::mk_atom(std::move(at));
    }
    case Arith::Kind::Not: return Arith::mk_not(subst_arith(a->a, s));
    case Arith::Kind::And: return Arith::mk_and(subst_arith(a->a, s), subst_arith(a->b, s));
    case Arith::Kind::Or: return Arith::mk_or(subst_arith(a->a, s), subst_arith(a->b, s));
  }
  return a;
}

std::set<std::string> subst_range_vars(const Subst& s) {
  std::set<std::string> out;
  for (const auto& [v, a] : s) {
    (void)v;
    vars_of_arg(a, out);
  }
  return out;
}

// Simultaneous capture-avoiding substitution.
SymHeap subst_many(const SymHeap& h, Subst s) {
  // Bound variables shadow: drop them from the substitution.
  for (const auto& b : h.bound) s.erase(b.name);
  if (s.empty()) return h;

  SymHeap r = h;
  // Rename bound variables that would capture replacement variables.
  std::set<std::string> danger = subst_range_vars(s);
  std::set<std::string> used;
  collect_all_vars(h, used);
  for (const auto& [v, a] : s) {
    (void)a;
    used.insert(v);
  }
  used.insert(danger.begin(), danger.end());
  Subst renames;
  for (auto& b : r.bound) {
    if (danger.count(b.name)) {
      std::string nn = fresh_name(b.name, used);
      used.insert(nn);
      renames.emplace(b.name, b.sort.is_ptr() ? Arg{Term::mk_var(nn)}
                                              : Arg{LinExpr::variable(nn)});
      b.name = nn;
    }
  }
  if (!renames.empty()) {
    SymHeap tmp = r;
    tmp.bound.clear();
    tmp = subst_many(tmp, renames);  // no capture possible: fresh targets
    tmp.bound = r.bound;
    r = std::move(tmp);
  }

  for (auto& sa : r.spatial) {
    if (std::holds_alternative<PointsTo>(sa)) {
      auto& p = std::get<PointsTo>(sa);
      p.root = subst_term(p.root, s);
      for (auto& f : p.fields) f = subst_arg(f, s);
    } else {
      for (auto& f : std::get<PredApp>(sa).args) f = subst_arg(f, s);
    }
  }
  for (auto& l : r.alias) {
    l.lhs = subst_term(l.lhs, s);
    l.rhs = subst_term(l.rhs, s);
  }
  r.arith = subst_arith(r.arith, s);
  return r;
}

}  // namespace

SymHeap substitute(const SymHeap& h, const std::string& var, const Arg& replacement) {
  Subst s;
  s.emplace(var, replacement);
  return subst_many(h, std::move(s));
}

SymHeap substitute_many(const SymHeap& h, const std::map<std::string, Arg>& subst) {
  return subst_many(h, subst);
}

Formula substitute(const Formula& f, const std::string& var, const Arg& replacement) {
  Formula out;
  out.reserve(f.size());
  for (const auto& h : f) out.push_back(substitute(h, var, replacement));
  return out;
}

// ---------------------------------------------------------------------------
// Conjunction and star composition

void conjoin(SymHeap& h, const PureLit& lit) {
  if (lit.positive && lit.lhs == lit.rhs) return;  // trivially true
  for (const auto& l : h.alias)
    if (l == lit) return;
  h.alias.push_back(lit);
}

void conjoin(SymHeap& h, const ArithPtr& a) { h.arith = Arith::mk_and(h.arith, a); }

SymHeap star(const SymHeap& h, const SymHeap& extra) {
  SymHeap rhs = extra;
  // Rename bound variables of the extra part away from everything in h.
  std::set<std::string> used;
  collect_all_vars(h, used);
  collect_all_vars(extra, used);
  Subst renames;
  for (auto& b : rhs.bound) {
    std::set<std::string> lhs_vars;
    collect_all_vars(h, lhs_vars);
    if (lhs_vars.count(b.name)) {
      std::string nn = fresh_name(b.name, used);
      used.insert(nn);
      renames.emplace(b.name, b.sort.is_ptr() ? Arg{Term::mk_var(nn)}
                                              : Arg{LinExpr::variable(nn)});
      b.name = nn;
    }
  }
  if (!renames.empty()) {
    SymHeap tmp = rhs;
    tmp.bound.clear();
    tmp = subst_many(tmp, renames);
    tmp.bound = rhs.bound;
    rhs = std::move(tmp);
  }
  SymHeap out = h;
  out.bound.insert(out.bound.end(), rhs.bound.begin(), rhs.bound.end());
  out.spatial.insert(out.spatial.end(), rhs.spatial.begin(), rhs.spatial.end());
  for (const auto& l : rhs.alias) conjoin(out, l);
  conjoin(out, rhs.arith);
  return out;
}

uint64_t assign_occ_ids(SymHeap& h, uint64_t start) {
  for (auto& sa : h.spatial)
    if (auto* pa = std::get_if<PredApp>(&sa)) pa->occ_id = start++;
  return start;
}

// ---------------------------------------------------------------------------
// Unfolding

std::vector<SymHeap> unfold(const SymHeap& h, uint64_t occ_id, const PredEnv& env,
                            uint64_t* next_occ, const std::set<std::string>* avoid) {
  int at = -1;
  for (size_t i = 0; i < h.spatial.size(); ++i) {
    if (std::holds_alternative<PredApp>(h.spatial[i]) &&
        std::get<PredApp>(h.spatial[i]).occ_id == occ_id) {
      at = static_cast<int>(i);
      break;
    }
  }
  if (at < 0) throw std::invalid_argument("unfold: no predicate occurrence with this id");
  const PredApp app = std::get<PredApp>(h.spatial[static_cast<size_t>(at)]);
  const PredicateDef* def = env.find(app.name);
  if (!def) throw std::invalid_argument("unfold: unknown predicate '" + app.name + "'");
  if (def->formals.size() != app.args.size())
    throw std::invalid_argument("unfold: arity mismatch for '" + app.name + "'");

  std::vector<SymHeap> out;
  for (const SymHeap& disjunct : def->body) {
    // Freshen the disjunct's existentials away from names visible in h and
    // in the actual arguments.
    std::set<std::string> used;
    collect_all_vars(h, used);
    for (const auto& a : app.args) vars_of_arg(a, used);
    if (avoid) used.insert(avoid->begin(), avoid->end());
    SymHeap body = disjunct;
    Subst renames;
    for (auto& b : body.bound) {
      if (used.count(b.name)) {
        std::string nn = fresh_name(b.name, used);
        used.insert(nn);
        renames.emplace(b.name, b.sort.is_ptr() ? Arg{Term::mk_var(nn)}
                                                : Arg{LinExpr::variable(nn)});
        b.name = nn;
      } else {
        used.insert(b.name);
      }
    }
    if (!renames.empty()) {
      SymHeap tmp = body;
      tmp.bound.clear();
      tmp = subst_many(tmp, renames);
      tmp.bound = body.bound;
      body = std::move(tmp);
    }
    // Substitute actuals for formals (simultaneous).
    Subst s;
    for (size_t i = 0; i < def->formals.size(); ++i) s.emplace(def->formals[i].name, app.args[i]);
    {
      SymHeap tmp = body;
      auto saved_bound = tmp.bound;
      tmp.bound.clear();  // formals are free in the body; bound already fresh
      tmp = subst_many(tmp, s);
      tmp.bound = saved_bound;
      body = std::move(tmp);
    }
    // Marks propagate to predicate applications introduced by the unfolding;
    // occurrence ids are drawn from the caller's counter.
    for (auto& sa : body.spatial) {
      if (std::holds_alternative<PredApp>(sa)) {
        auto& pa = std::get<PredApp>(sa);
        pa.marked = app.marked;
        pa.occ_id = next_occ ? (*next_occ)++ : 0;
      }
    }
    // Splice: replace the occurrence with the body's atoms.
    SymHeap result = h;
    result.spatial.erase(result.spatial.begin() + at);
    SymHeap splice;
    splice.bound = body.bound;
    splice.spatial = body.spatial;
    splice.alias = body.alias;
    splice.arith = body.arith;
    result = star(result, splice);
    // Keep the body's atoms in the position of the occurrence for stable
    // printing: rotate the appended atoms into place.
    std::rotate(result.spatial.begin() + at,
                result.spatial.end() - static_cast<long>(body.spatial.size()),
                result.spatial.end());
    out.push_back(std::move(result));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sort inference over an elaborated heap

std::map<std::string, Sort> infer_sorts(const SymHeap& h, const PredEnv& env,
                                        const std::vector<il::DataDecl>* decls) {
  std::map<std::string, Sort> sorts;
  auto note = [&](const std::string& v, Sort s) {
    auto it = sorts.find(v);
    if (it == sorts.end()) {
      sorts.emplace(v, std::move(s));
      return;
    }
    if (it->second.kind != s.kind)
      throw std::runtime_error("sort conflict for variable '" + v + "'");
    if (it->second.node_type.empty()) it->second.node_type = s.node_type;
    else if (!s.node_type.empty() && it->second.node_type != s.node_type)
      throw std::runtime_error("record type conflict for variable '" + v + "': " +
                               it->second.node_type + " vs " + s.node_type);
  };
  for (const auto& b : h.bound) note(b.name, b.sort);
  for (const auto& sa : h.spatial) {
    if (std::holds_alternative<PointsTo>(sa)) {
      const auto& p = std::get<PointsTo>(sa);
      if (p.root.is_var()) note(p.root.var, Sort::ptr(p.node_type));
      const il::DataDecl* d = nullptr;
      if (decls)
        for (const auto& dd : *decls)
          if (dd.name == p.node_type) d = &dd;
      for (size_t i = 0; i < p.fields.size(); ++i) {
        if (std::holds_alternative<Term>(p.fields[i])) {
          const Term& t = std::get<Term>(p.fields[i]);
          if (t.is_var()) {
            std::string nt;
            if (d && i < d->fields.size() && d->fields[i].second.is_node())
              nt = d->fields[i].second.node;
            note(t.var, Sort::ptr(nt));
          }
        } else {
          std::set<std::string> vs;
          vars_of_lin(std::get<LinExpr>(p.fields[i]), vs);
          for (const auto& v : vs) note(v, Sort::integer());
        }
      }
    } else {
      const auto& pa = std::get<PredApp>(sa);
      const PredicateDef* def = env.find(pa.name);
      for (size_t i = 0; i < pa.args.size(); ++i) {
        Sort formal = def && i < def->formals.size() ? def->formals[i].sort
                                                     : Sort::ptr();
        if (std::holds_alternative<Term>(pa.args[i])) {
          const Term& t = std::get<Term>(pa.args[i]);
          if (t.is_var()) note(t.var, formal);
        } else {
          std::set<std::string> vs;
          vars_of_lin(std::get<LinExpr>(pa.args[i]), vs);
          for (const auto& v : vs) note(v, Sort::integer());
        }
      }
    }
  }
  for (const auto& l : h.alias) {
    if (l.lhs.is_var()) note(l.lhs.var, Sort::ptr());
    if (l.rhs.is_var()) note(l.rhs.var, Sort::ptr());
  }
  std::set<std::string> avs;
  vars_of_arith(h.arith, avs);
  for (const auto& v : avs) note(v, Sort::integer());
  return sorts;
}

// ---------------------------------------------------------------------------
// Well-foundedness classification

namespace {

// Collects top-level conjunctive atoms of an arithmetic tree.
void conj_atoms(const ArithPtr& a, std::vector<ArithAtom>& out) {
  if (!a) return;
  if (a->kind == Arith::Kind::Atom) out.push_back(a->atom);
  else if (a->kind == Arith::Kind::And) {
    conj_atoms(a->a, out);
    conj_atoms(a->b, out);
  }
}

bool disjunct_is_well_founded(const PredicateDef& def, const SymHeap& d) {
  bool has_pred = false, has_cell = false;
  for (const auto& sa : d.spatial) {
    if (std::holds_alternative<PointsTo>(sa)) has_cell = true;
    else has_pred = true;
  }
  if (!has_pred || has_cell) return true;  // base case, or progress by allocation

  // Otherwise every application must be a self-call that strictly decreases
  // some integer formal which the disjunct bounds from below.
  std::vector<ArithAtom> guards;
  conj_atoms(d.arith, guards);
  for (size_t fi = 0; fi < def.formals.size(); ++fi) {
    const TypedVar& f = def.formals[fi];
    if (f.sort.is_ptr()) continue;
    bool all_decrease = true;
    for (const auto& sa : d.spatial) {
      if (!std::holds_alternative<PredApp>(sa)) continue;
      const auto& pa = std::get<PredApp>(sa);
      if (pa.name != def.name) { all_decrease = false; break; }
      if (fi >= pa.args.size() || !std::holds_alternative<LinExpr>(pa.args[fi])) {
        all_decrease = false;
        break;
      }
      const LinExpr& e = std::get<LinExpr>(pa.args[fi]);
      auto it = e.coeff.find(f.name);
      bool dec = it != e.coeff.end() && it->second == 1 && e.coeff.size() == 1 && e.k <= -1;
      if (!dec) { all_decrease = false; break; }
    }
    if (!all_decrease) continue;
    // A lower bound: any guard atom with a negative coefficient on f (for Le)
    // or any equality mentioning f.
    for (const auto& g : guards) {
      auto it = g.expr.coeff.find(f.name);
      if (it == g.expr.coeff.end()) continue;
      if (g.op == ArithAtom::Op::Eq || it->second < 0) return true;
    }
  }
  return false;
}

}  // namespace

void classify_well_founded(PredEnv& env) {
  for (auto& [name, def] : env.defs) {
    (void)name;
    def.well_founded = true;
    for (const auto& d : def.body)
      if (!disjunct_is_well_founded(def, d)) {
        def.well_founded = false;
        break;
      }
  }
}

}  // namespace sepgen::sl
