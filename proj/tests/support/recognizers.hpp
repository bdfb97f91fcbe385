#pragma once

// Direct structural checks for the shapes the bundled predicates describe,
// written against the concrete heap representation only — no formula
// machinery — so they can serve as an independent oracle.  All of them use
// exact-footprint semantics: the heap must contain the structure's cells
// and nothing else.

#include <cstdint>

#include "sepgen/il/ast.hpp"

namespace sepgen::oracle {

// x and y head equal-length, disjoint, null-terminated `node` lists that
// together occupy the heap exactly.  Payloads are unconstrained.
bool is_eqlen(const il::ConcreteState& st, const il::Value& x,
              const il::Value& y);

// x heads a null-terminated `node` list occupying the heap exactly.
bool is_sll(const il::ConcreteState& st, const il::Value& x);

// h heads a doubly-linked `dnode` list whose first back pointer is p and
// whose every later back pointer addresses the preceding cell.
bool is_dll(const il::ConcreteState& st, const il::Value& h,
            const il::Value& p);

// t roots a binary `tnode` tree (no sharing, no cycles); payloads free.
bool is_bst_shape(const il::ConcreteState& st, const il::Value& t);

// Like is_bst_shape with strictly increasing in-order payloads inside
// (lo, hi).
bool is_bst(const il::ConcreteState& st, const il::Value& t, int64_t lo,
            int64_t hi);

// root heads a chain of exactly 2^n cells, payloads all 0, whose last next
// pointer equals out.
bool is_pow2seg(const il::ConcreteState& st, const il::Value& root,
                const il::Value& out, int64_t n);

}  // namespace sepgen::oracle
