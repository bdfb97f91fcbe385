#include "sepgen/lazy/lfp.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "sepgen/solver/pure.hpp"

namespace sepgen::lazy {

namespace {

// Proxy standing for the abstract value of x in implication checks.  The
// spec grammar cannot produce '@', so it never collides with formula names.
const char* kProxy = "@x";

bool has_occ(const sl::SymHeap& h, uint64_t occ_id) {
  for (const auto& sa : h.spatial)
    if (const auto* pa = std::get_if<sl::PredApp>(&sa))
      if (pa->occ_id == occ_id) return true;
  return false;
}

uint64_t max_occ(const sl::SymHeap& h) {
  uint64_t m = 0;
  for (const auto& sa : h.spatial)
    if (const auto* pa = std::get_if<sl::PredApp>(&sa))
      m = std::max(m, pa->occ_id);
  return m;
}

// The abstract fact as (dis)equality literals over the proxy.
std::vector<sl::PureLit> encode(const AbsDisjunct& d) {
  std::vector<sl::PureLit> lits;
  sl::Term p = sl::Term::mk_var(kProxy);
  switch (d.fact.kind) {
    case AbstractFact::Kind::Null:
      lits.push_back({true, p, sl::Term::null()});
      break;
    case AbstractFact::Kind::Existing:
      lits.push_back({true, p, sl::Term::mk_var(d.fact.existing)});
      lits.push_back({false, p, sl::Term::null()});
      break;
    case AbstractFact::Kind::NewObj:
      // The location is existentially bound, so all that remains visible is
      // allocatedness; this is what lets fresh-cell contexts collapse.
      lits.push_back({false, p, sl::Term::null()});
      break;
    case AbstractFact::Kind::True:
      break;
  }
  lits.insert(lits.end(), d.alias.begin(), d.alias.end());
  return lits;
}

bool contradictory(const std::vector<sl::PureLit>& lits) {
  sl::SymHeap h;
  h.alias = lits;
  return solver::Congruence(h).contradictory();
}

// Is conj ∧ ¬neg[i] ∧ ¬neg[i+1] ∧ ... unsatisfiable?  Negating a disjunct
// branches over the negation of each of its literals.
bool refute(std::vector<sl::PureLit>& conj,
            const std::vector<std::vector<sl::PureLit>>& neg, size_t i) {
  if (contradictory(conj)) return true;
  if (i == neg.size()) return false;
  if (neg[i].empty()) return true;  // negation of `true` closes the branch
  for (const auto& lit : neg[i]) {
    sl::PureLit flipped = lit;
    flipped.positive = !flipped.positive;
    conj.push_back(flipped);
    bool closed = refute(conj, neg, i + 1);
    conj.pop_back();
    if (!closed) return false;
  }
  return true;
}

std::vector<uint64_t> marked_ids(const sl::SymHeap& h) {
  std::vector<uint64_t> ids;
  for (const auto& sa : h.spatial)
    if (const auto* pa = std::get_if<sl::PredApp>(&sa))
      if (pa->marked) ids.push_back(pa->occ_id);
  return ids;
}

// Distinct abstract-value strings, in first-appearance order — the compact
// rendering used by the iteration table (aliasing conjuncts omitted).
std::string abstraction_line(const Abstraction& a, const std::string& x) {
  if (a.empty()) return "false";
  std::vector<std::string> parts;
  for (const auto& d : a) {
    std::string f = d.fact.str(x);
    if (std::find(parts.begin(), parts.end(), f) == parts.end())
      parts.push_back(f);
  }
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i)
    out += (i ? " \\/ " : "") + parts[i];
  return out;
}

}  // namespace

std::string AbstractFact::str(const std::string& x) const {
  switch (kind) {
    case Kind::Null:
      return "s(" + x + ") = null";
    case Kind::Existing:
      return "s(" + x + ") = " + existing;
    case Kind::NewObj:
      return "ex l'. s(" + x + ") = l'";
    case Kind::True:
      return "true";
  }
  return {};
}

std::vector<EnumContext> unfold_pair(const EnumContext& ctx, uint64_t occ_id,
                                     const sl::PredEnv& env,
                                     uint64_t* next_occ) {
  std::set<std::string> avoid;
  sl::collect_all_vars(ctx.delta, avoid);
  sl::collect_all_vars(ctx.input, avoid);
  bool mirrored = has_occ(ctx.input, occ_id);
  uint64_t ca = *next_occ, cb = *next_occ;
  auto deltas = sl::unfold(ctx.delta, occ_id, env, &ca, &avoid);
  std::vector<sl::SymHeap> inputs;
  if (mirrored) inputs = sl::unfold(ctx.input, occ_id, env, &cb, &avoid);
  *next_occ = std::max(ca, cb);

  std::vector<EnumContext> out;
  out.reserve(deltas.size());
  for (size_t i = 0; i < deltas.size(); ++i) {
    EnumContext e;
    e.delta = std::move(deltas[i]);
    e.input = mirrored ? std::move(inputs[i]) : ctx.input;
    e.provenance = ctx.provenance.empty()
                       ? std::to_string(i)
                       : ctx.provenance + "." + std::to_string(i);
    out.push_back(std::move(e));
  }
  return out;
}

AbstractFact abs(const std::map<std::string, sl::Term>& s, const std::string& x,
                 const std::set<std::string>& V, const sl::SymHeap& h) {
  auto it = s.find(x);
  if (it == s.end())
    throw std::invalid_argument("abs: no symbolic value for '" + x + "'");
  const sl::Term& X = it->second;
  solver::Congruence c(h);
  if (c.same(X, sl::Term::null())) return {AbstractFact::Kind::Null, {}};
  const auto& alloc = c.allocated();
  if (std::find(alloc.begin(), alloc.end(), c.find(X)) != alloc.end()) {
    for (const auto& v : V)
      if (c.same(X, sl::Term::mk_var(v))) return {AbstractFact::Kind::Existing, v};
    return {AbstractFact::Kind::NewObj, {}};
  }
  return {AbstractFact::Kind::True, {}};
}

bool abstraction_implies(const Abstraction& lhs, const Abstraction& rhs) {
  std::vector<std::vector<sl::PureLit>> neg;
  neg.reserve(rhs.size());
  for (const auto& d : rhs) neg.push_back(encode(d));
  for (const auto& d : lhs) {
    std::vector<sl::PureLit> conj = encode(d);
    if (!refute(conj, neg, 0)) return false;
  }
  return true;
}

LfpResult lfp(const std::string& x, const std::map<std::string, sl::Term>& s,
              const EnumContext& start, const std::set<std::string>& V,
              const sl::PredEnv& env, const LfpOptions& opts,
              uint64_t* next_occ) {
  uint64_t local = std::max(max_occ(start.delta), max_occ(start.input)) + 1;
  if (!next_occ) next_occ = &local;

  std::ostringstream dump;
  if (opts.dump) {
    dump << "lfp: " << x << " = " << (s.count(x) ? s.at(x).str() : "?") << "\n";
    dump << "V: {";
    size_t i = 0;
    for (const auto& v : V) dump << (i++ ? ", " : "") << v;
    dump << "}\n";
    dump << "marked:";
    for (const auto& sa : start.delta.spatial)
      if (const auto* pa = std::get_if<sl::PredApp>(&sa); pa && pa->marked)
        dump << " " << pa->str();
    dump << "\n";
    dump << "i=0: SV = { " << start.delta.str() << " }; A = false\n";
  }

  std::vector<EnumContext> sv{start};
  Abstraction a;  // empty disjunction: false
  for (int iter = 1; iter <= opts.iter_cap; ++iter) {
    // One-step unfold of every occurrence that was marked at the head of
    // the iteration (applications introduced by these unfoldings inherit
    // the mark but wait for the next round).
    std::vector<EnumContext> expanded;
    for (const auto& ctx : sv) {
      std::vector<uint64_t> ids = marked_ids(ctx.delta);
      if (ids.empty()) {
        expanded.push_back(ctx);
        continue;
      }
      std::vector<EnumContext> work{ctx};
      for (uint64_t id : ids) {
        std::vector<EnumContext> acc;
        for (const auto& w : work) {
          auto parts = unfold_pair(w, id, env, next_occ);
          acc.insert(acc.end(), std::make_move_iterator(parts.begin()),
                     std::make_move_iterator(parts.end()));
        }
        work = std::move(acc);
      }
      expanded.insert(expanded.end(), std::make_move_iterator(work.begin()),
                      std::make_move_iterator(work.end()));
    }

    std::vector<EnumContext> kept;
    for (auto& ctx : expanded) {
      auto r = solver::check_sat(ctx.delta, env, opts.solver);
      if (r.status != solver::SatResult::Unsat) kept.push_back(std::move(ctx));
    }

    Abstraction a2;
    for (const auto& ctx : kept) {
      AbsDisjunct d{abs(s, x, V, ctx.delta),
                    solver::project(ctx.delta.alias, V)};
      if (std::find(a2.begin(), a2.end(), d) == a2.end())
        a2.push_back(std::move(d));
    }

    if (opts.dump) {
      dump << "i=" << iter << ":\n";
      for (size_t j = 0; j < kept.size(); ++j)
        dump << "  SV[" << j << "] = " << kept[j].delta.str() << "\n";
      dump << "  A = " << abstraction_line(a2, x) << "\n";
    }

    if (abstraction_implies(a2, a)) {
      if (opts.dump) {
        dump << "fixpoint: A(" << iter << ") => A(" << iter - 1 << ")\n";
        dump << "result: SV(" << iter - 1 << "), " << sv.size()
             << " contexts, " << iter << " iterations\n";
      }
      return {std::move(sv), iter, std::move(a), dump.str()};
    }
    sv = std::move(kept);
    a = std::move(a2);
  }
  throw std::runtime_error(
      "lfp: no fixpoint for '" + x + "' within " +
      std::to_string(opts.iter_cap) +
      " iterations; is every constraining predicate well-founded?");
}

}  // namespace sepgen::lazy
