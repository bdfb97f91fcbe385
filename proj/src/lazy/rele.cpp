#include "sepgen/lazy/rele.hpp"

#include "sepgen/solver/pure.hpp"

namespace sepgen::lazy {

namespace {

// Pointer-typed variable arguments of an application.
std::vector<std::string> ptr_vars(const sl::PredApp& app) {
  std::vector<std::string> out;
  for (const auto& a : app.args)
    if (const auto* t = std::get_if<sl::Term>(&a); t && t->is_var())
      out.push_back(t->var);
  return out;
}

bool in_set_mod_alias(const std::string& v, const std::set<std::string>& set,
                      const solver::Congruence& c) {
  sl::Term t = sl::Term::mk_var(v);
  for (const auto& u : set)
    if (c.same(t, sl::Term::mk_var(u))) return true;
  return false;
}

}  // namespace

std::set<std::string> rele(const std::set<std::string>& seed,
                           const sl::SymHeap& delta) {
  solver::Congruence c(delta);
  std::set<std::string> v = seed;
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& sa : delta.spatial) {
      const auto* app = std::get_if<sl::PredApp>(&sa);
      if (!app) continue;
      auto ts = ptr_vars(*app);
      bool inside = false, outside = false;
      for (const auto& t : ts)
        (in_set_mod_alias(t, v, c) ? inside : outside) = true;
      if (inside && outside) {
        for (const auto& t : ts) grew |= v.insert(t).second;
      }
    }
  }
  return v;
}

std::vector<uint64_t> constraining_occurrences(
    const std::set<std::string>& closure, const sl::SymHeap& delta) {
  solver::Congruence c(delta);
  std::vector<uint64_t> out;
  for (const auto& sa : delta.spatial) {
    const auto* app = std::get_if<sl::PredApp>(&sa);
    if (!app) continue;
    auto ts = ptr_vars(*app);
    if (ts.empty()) continue;
    bool all = true;
    for (const auto& t : ts)
      if (!in_set_mod_alias(t, closure, c)) all = false;
    if (all) out.push_back(app->occ_id);
  }
  return out;
}

void set_marks(sl::SymHeap& h, const std::vector<uint64_t>& ids, bool value) {
  for (auto& sa : h.spatial)
    if (auto* pa = std::get_if<sl::PredApp>(&sa))
      for (uint64_t id : ids)
        if (pa->occ_id == id) pa->marked = value;
}

}  // namespace sepgen::lazy
