#include "enumerate_states.hpp"

namespace sepgen::oracle {

namespace {

struct Slot {
  bool on_stack = false;
  std::string var;  // stack slot
  il::Loc loc;      // field slot
  int field = 0;
};

struct Gen {
  const StateSpace& sp;
  const std::function<bool(const il::ConcreteState&)>& fn;
  il::ConcreteState st;
  std::vector<Slot> slots;  // grows when a cell is allocated
  int allocated = 0;
  uint64_t count = 0;
  bool stop = false;

  il::Loc dangling_loc() const {
    return il::Loc{static_cast<uint32_t>(sp.max_cells) + 1};
  }

  void put(const Slot& s, const il::Value& v) {
    if (s.on_stack)
      st.stack[s.var] = v;
    else
      st.heap[s.loc].fields[static_cast<size_t>(s.field)] = v;
  }

  void ref_choice(size_t idx, const il::Value& v) {
    put(slots[idx], v);
    next(idx + 1);
  }

  // Allocate the next cell and point the slot at it.  The new cell's own
  // slots are appended; integer fields double as slots too so their values
  // range over sp.ints.
  void fresh_choice(size_t idx) {
    il::Loc l{static_cast<uint32_t>(++allocated)};
    il::Record rec;
    rec.node_type = sp.decl.name;
    rec.fields.assign(sp.decl.fields.size(), il::Value::null());
    st.heap[l] = std::move(rec);
    size_t added = 0;
    for (size_t f = 0; f < sp.decl.fields.size(); ++f) {
      slots.push_back(Slot{false, {}, l, static_cast<int>(f)});
      ++added;
    }
    put(slots[idx], il::Value::loc(l));
    next(idx + 1);
    slots.resize(slots.size() - added);
    st.heap.erase(l);
    --allocated;
  }

  void next(size_t idx) {
    if (stop) return;
    if (idx == slots.size()) {
      ++count;
      if (!fn(st)) stop = true;
      return;
    }
    const Slot s = slots[idx];
    il::Type::Kind kind;
    if (s.on_stack) {
      kind = il::Type::Kind::Node;  // int stack vars handled separately
    } else {
      kind = sp.decl.fields[static_cast<size_t>(s.field)].second.kind;
    }
    switch (kind) {
      case il::Type::Kind::Int:
        for (int64_t v : sp.ints) {
          put(s, il::Value::integer(v));
          next(idx + 1);
          if (stop) return;
        }
        break;
      case il::Type::Kind::Bool:
        for (bool b : {false, true}) {
          put(s, il::Value::boolean(b));
          next(idx + 1);
          if (stop) return;
        }
        break;
      case il::Type::Kind::Node:
        ref_choice(idx, il::Value::null());
        if (stop) return;
        for (int l = 1; l <= allocated; ++l) {
          ref_choice(idx, il::Value::loc(il::Loc{static_cast<uint32_t>(l)}));
          if (stop) return;
        }
        if (allocated < sp.max_cells) {
          fresh_choice(idx);
          if (stop) return;
        }
        if (sp.dangling) ref_choice(idx, il::Value::loc(dangling_loc()));
        break;
    }
  }

  void int_vars(size_t i) {
    if (stop) return;
    if (i == sp.int_vars.size()) {
      next(0);
      return;
    }
    for (int64_t v : sp.stack_ints.empty() ? sp.ints : sp.stack_ints) {
      st.stack[sp.int_vars[i]] = il::Value::integer(v);
      int_vars(i + 1);
      if (stop) return;
    }
  }
};

}  // namespace

uint64_t enumerate_states(
    const StateSpace& space,
    const std::function<bool(const il::ConcreteState&)>& fn) {
  Gen g{space, fn, {}, {}, 0, 0, false};
  for (const auto& v : space.ref_vars) g.slots.push_back(Slot{true, v, {}, 0});
  g.int_vars(0);
  return g.count;
}

}  // namespace sepgen::oracle
