#pragma once

// Reasoning about the reference part of a symbolic heap: equalities and
// disequalities between variables and null, plus the disequalities implied by
// separation (distinct points-to atoms address distinct non-null cells).

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sepgen/sl/formula.hpp"

namespace sepgen::solver {

// Union-find over the reference terms of one symbolic heap.  Equalities come
// from the positive alias literals; disequalities from the negative ones and
// from the spatial part.
class Congruence {
 public:
  explicit Congruence(const sl::SymHeap& h);

  // An explicit contradiction was found (x = y and x != y derivable, a
  // points-to root equal to null, or two points-to roots aliased).
  bool contradictory() const { return contradictory_; }

  bool same(const sl::Term& a, const sl::Term& b) const;      // provably equal
  bool distinct(const sl::Term& a, const sl::Term& b) const;  // provably distinct

  // Canonical class key for a term ("null" for the null class).  Terms never
  // mentioned in the heap are their own class.
  std::string find(const sl::Term& t) const;

  // Class keys of the points-to roots, in spatial order (no duplicates).
  const std::vector<std::string>& allocated() const { return allocated_; }

 private:
  std::string root_of(const std::string& key) const;
  void unite(const std::string& a, const std::string& b);

  mutable std::map<std::string, std::string> parent_;
  std::vector<std::pair<std::string, std::string>> diseqs_;  // class-key pairs
  std::vector<std::string> allocated_;
  bool contradictory_ = false;
};

// Does the reference part of `h` entail the literal?  (True in particular
// when the reference part is contradictory.)
bool pure_implies(const sl::SymHeap& h, const sl::PureLit& lit);

// Projection of an alias conjunction onto the variables V (null is always
// kept): equalities with a variable outside V are eliminated by substituting
// it away in the remaining literals, literals entirely over V are kept, and
// disequalities involving an outside variable are dropped.  A contradictory
// literal (t != t) yields the single canonical false literal null != null.
std::vector<sl::PureLit> project(std::vector<sl::PureLit> alias,
                                 const std::set<std::string>& V);

}  // namespace sepgen::solver
