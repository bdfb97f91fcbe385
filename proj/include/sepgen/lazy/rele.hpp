#pragma once

// Relevant-variable closure: which symbolic variables must be consulted when
// initializing a given one, and which predicate occurrences in the path
// condition constrain it.

#include <set>
#include <string>
#include <vector>

#include "sepgen/sl/formula.hpp"

namespace sepgen::lazy {

// Least superset of `seed` closed under absorbing the pointer-typed variable
// arguments of any predicate application that — modulo the aliasing in
// `delta` — straddles the set: shares a member with it and has one outside.
std::set<std::string> rele(const std::set<std::string>& seed,
                           const sl::SymHeap& delta);

// Occurrence ids of the predicate applications whose pointer-typed variable
// arguments all lie (modulo aliasing) inside `closure`, in spatial order.
// These are the applications constraining the variable the closure was
// seeded with.  Applications without pointer variables constrain nothing
// and are never returned.
std::vector<uint64_t> constraining_occurrences(
    const std::set<std::string>& closure, const sl::SymHeap& delta);

// Sets the mark bit on the occurrences with the given ids.
void set_marks(sl::SymHeap& h, const std::vector<uint64_t>& ids,
               bool value = true);

}  // namespace sepgen::lazy
