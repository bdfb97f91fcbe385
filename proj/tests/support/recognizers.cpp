#include "recognizers.hpp"

#include <set>

namespace sepgen::oracle {

namespace {

const il::Record* cell(const il::ConcreteState& st, const il::Value& v,
                       const char* type, size_t arity) {
  if (!v.is_loc()) return nullptr;
  auto it = st.heap.find(v.as_loc());
  if (it == st.heap.end()) return nullptr;
  const il::Record& r = it->second;
  if (r.node_type != type || r.fields.size() != arity) return nullptr;
  return &r;
}

// Walks a next-chain from v to null, recording visited cells; false on a
// revisit (cycle or sharing with `seen`), a dangling hop, or a bad record.
bool walk_list(const il::ConcreteState& st, il::Value v,
               std::set<il::Loc>& seen) {
  while (!v.is_null()) {
    const il::Record* r = cell(st, v, "node", 2);
    if (!r || !seen.insert(v.as_loc()).second) return false;
    v = r->fields[1];
  }
  return true;
}

bool exact(const il::ConcreteState& st, const std::set<il::Loc>& seen) {
  if (st.heap.size() != seen.size()) return false;
  for (const auto& [l, r] : st.heap) {
    (void)r;
    if (!seen.count(l)) return false;
  }
  return true;
}

bool tree(const il::ConcreteState& st, const il::Value& t,
          std::set<il::Loc>& seen) {
  if (t.is_null()) return true;
  const il::Record* r = cell(st, t, "tnode", 3);
  if (!r || !seen.insert(t.as_loc()).second) return false;
  return tree(st, r->fields[1], seen) && tree(st, r->fields[2], seen);
}

bool ordered_tree(const il::ConcreteState& st, const il::Value& t, int64_t lo,
                  int64_t hi, std::set<il::Loc>& seen) {
  if (t.is_null()) return true;
  const il::Record* r = cell(st, t, "tnode", 3);
  if (!r || !seen.insert(t.as_loc()).second) return false;
  if (!r->fields[0].is_int()) return false;
  int64_t v = r->fields[0].as_int();
  if (!(lo < v && v < hi)) return false;
  return ordered_tree(st, r->fields[1], lo, v, seen) &&
         ordered_tree(st, r->fields[2], v, hi, seen);
}

}  // namespace

bool is_eqlen(const il::ConcreteState& st, const il::Value& x,
              const il::Value& y) {
  // Lockstep walk keeps the lengths equal by construction.
  std::set<il::Loc> seen;
  il::Value a = x, b = y;
  while (!a.is_null() || !b.is_null()) {
    const il::Record* ra = cell(st, a, "node", 2);
    const il::Record* rb = cell(st, b, "node", 2);
    if (!ra || !rb) return false;
    if (!seen.insert(a.as_loc()).second) return false;
    if (!seen.insert(b.as_loc()).second) return false;
    a = ra->fields[1];
    b = rb->fields[1];
  }
  return exact(st, seen);
}

bool is_sll(const il::ConcreteState& st, const il::Value& x) {
  std::set<il::Loc> seen;
  return walk_list(st, x, seen) && exact(st, seen);
}

bool is_dll(const il::ConcreteState& st, const il::Value& h,
            const il::Value& p) {
  std::set<il::Loc> seen;
  il::Value cur = h, back = p;
  while (!cur.is_null()) {
    const il::Record* r = cell(st, cur, "dnode", 3);
    if (!r || !seen.insert(cur.as_loc()).second) return false;
    if (r->fields[1] != back) return false;
    back = cur;
    cur = r->fields[2];
  }
  return exact(st, seen);
}

bool is_bst_shape(const il::ConcreteState& st, const il::Value& t) {
  std::set<il::Loc> seen;
  return tree(st, t, seen) && exact(st, seen);
}

bool is_bst(const il::ConcreteState& st, const il::Value& t, int64_t lo,
            int64_t hi) {
  std::set<il::Loc> seen;
  return ordered_tree(st, t, lo, hi, seen) && exact(st, seen);
}

bool is_pow2seg(const il::ConcreteState& st, const il::Value& root,
                const il::Value& out, int64_t n) {
  if (n < 0 || n > 20) return false;
  uint64_t len = 1ull << n;
  std::set<il::Loc> seen;
  il::Value cur = root;
  for (uint64_t i = 0; i < len; ++i) {
    const il::Record* r = cell(st, cur, "node", 2);
    if (!r || !seen.insert(cur.as_loc()).second) return false;
    if (r->fields[0] != il::Value::integer(0)) return false;
    cur = r->fields[1];
  }
  return cur == out && exact(st, seen);
}

}  // namespace sepgen::oracle
