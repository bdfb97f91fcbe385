#include "sepgen/solver/pure.hpp"

#include <algorithm>

namespace sepgen::solver {

namespace {
std::string key_of(const sl::Term& t) { return t.is_null() ? "null" : t.var; }
}  // namespace

Congruence::Congruence(const sl::SymHeap& h) {
  // Equalities first, so that disequality checks see the final classes.
  for (const auto& l : h.alias)
    if (l.positive) unite(key_of(l.lhs), key_of(l.rhs));
  for (const auto& l : h.alias)
    if (!l.positive) diseqs_.emplace_back(root_of(key_of(l.lhs)), root_of(key_of(l.rhs)));

  // Separation: every points-to root is non-null and distinct from the
  // others.  Predicate applications contribute nothing (they may be empty).
  std::vector<std::string> roots;
  for (const auto& sa : h.spatial) {
    if (const auto* p = std::get_if<sl::PointsTo>(&sa)) roots.push_back(root_of(key_of(p->root)));
  }
  for (size_t i = 0; i < roots.size(); ++i) {
    diseqs_.emplace_back(roots[i], root_of("null"));
    for (size_t j = i + 1; j < roots.size(); ++j) diseqs_.emplace_back(roots[i], roots[j]);
    if (std::find(allocated_.begin(), allocated_.end(), roots[i]) == allocated_.end())
      allocated_.push_back(roots[i]);
    else
      contradictory_ = true;  // two cells at the same address
  }
  for (const auto& [a, b] : diseqs_)
    if (root_of(a) == root_of(b)) contradictory_ = true;
}

std::string Congruence::root_of(const std::string& key) const {
  auto it = parent_.find(key);
  if (it == parent_.end()) return key;
  if (it->second == key) return key;
  std::string r = root_of(it->second);
  parent_[key] = r;  // path compression
  return r;
}

void Congruence::unite(const std::string& a, const std::string& b) {
  std::string ra = root_of(a), rb = root_of(b);
  if (ra == rb) return;
  // Keep "null" as a root so the null class is recognizable; otherwise the
  // lexicographically smaller name wins, for deterministic output.
  if (rb == "null" || (ra != "null" && rb < ra)) std::swap(ra, rb);
  parent_.emplace(ra, ra);
  parent_.emplace(rb, rb);
  parent_[rb] = ra;
}

std::string Congruence::find(const sl::Term& t) const { return root_of(key_of(t)); }

bool Congruence::same(const sl::Term& a, const sl::Term& b) const {
  return root_of(key_of(a)) == root_of(key_of(b));
}

bool Congruence::distinct(const sl::Term& a, const sl::Term& b) const {
  std::string ra = root_of(key_of(a)), rb = root_of(key_of(b));
  if (ra == rb) return false;
  for (const auto& [x, y] : diseqs_) {
    std::string rx = root_of(x), ry = root_of(y);
    if ((rx == ra && ry == rb) || (rx == rb && ry == ra)) return true;
  }
  return false;
}

bool pure_implies(const sl::SymHeap& h, const sl::PureLit& lit) {
  Congruence c(h);
  if (c.contradictory()) return true;
  return lit.positive ? c.same(lit.lhs, lit.rhs) : c.distinct(lit.lhs, lit.rhs);
}

std::vector<sl::PureLit> project(std::vector<sl::PureLit> alias,
                                 const std::set<std::string>& V) {
  auto in_v = [&](const sl::Term& t) { return t.is_null() || V.count(t.var) != 0; };
  std::vector<sl::PureLit> out;
  for (size_t i = 0; i < alias.size(); ++i) {
    sl::PureLit l = alias[i];
    if (l.positive && l.lhs == l.rhs) continue;  // trivial
    if (!l.positive && l.lhs == l.rhs) return {{false, sl::Term::null(), sl::Term::null()}};
    if (in_v(l.lhs) && in_v(l.rhs)) {
      out.push_back(l);
      continue;
    }
    if (l.positive) {
      // Substitute the outside variable by the other side everywhere else.
      sl::Term from = in_v(l.lhs) ? l.rhs : l.lhs;
      sl::Term to = in_v(l.lhs) ? l.lhs : l.rhs;
      for (size_t j = i + 1; j < alias.size(); ++j) {
        if (alias[j].lhs == from) alias[j].lhs = to;
        if (alias[j].rhs == from) alias[j].rhs = to;
      }
      // Kept literals mention only V, so they contain no occurrence of the
      // eliminated variable.
    }
    // Disequalities with an outside variable carry no expressible constraint.
  }
  // Deduplicate while preserving order.
  std::vector<sl::PureLit> dedup;
  for (const auto& l : out) {
    if (l.positive && l.lhs == l.rhs) continue;
    if (std::find(dedup.begin(), dedup.end(), l) == dedup.end()) dedup.push_back(l);
  }
  return dedup;
}

}  // namespace sepgen::solver
