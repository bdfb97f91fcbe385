#include "sepgen/il/interp.hpp"

namespace sepgen::il {

namespace {

// Checked 64-bit arithmetic.  Returns false on overflow.
bool checked_arith(const std::string& op, int64_t a, int64_t b, int64_t& out) {
  if (op == "+") return !__builtin_add_overflow(a, b, &out);
  if (op == "-") return !__builtin_sub_overflow(a, b, &out);
  if (op == "*") return !__builtin_mul_overflow(a, b, &out);
  return false;
}

std::string type_fault(const std::string& op) {
  return "type mismatch in '" + op + "'";
}

}  // namespace

EvalResult eval_expr(const ConcreteState& state, const Program& prog,
                     const Expr& e, const InterpOptions& opts) {
  switch (e.kind) {
    case Expr::Kind::IntConst: return Value::integer(e.int_val);
    case Expr::Kind::BoolConst: return Value::boolean(e.bool_val);
    case Expr::Kind::Null: return Value::null();
    case Expr::Kind::Var: {
      auto it = state.stack.find(e.var);
      if (it == state.stack.end()) return "read of unbound variable '" + e.var + "'";
      return it->second;
    }
    case Expr::Kind::FieldLoad: {
      auto it = state.stack.find(e.var);
      if (it == state.stack.end()) return "read of unbound variable '" + e.var + "'";
      const Value& base = it->second;
      if (base.is_null()) return "null dereference at '" + e.var + "." + e.field + "'";
      if (!base.is_loc()) return "dereference of non-reference '" + e.var + "'";
      auto hit = state.heap.find(base.as_loc());
      if (hit == state.heap.end())
        return "dangling reference at '" + e.var + "." + e.field + "'";
      const Record& r = hit->second;
      const DataDecl* d = prog.find_decl(r.node_type);
      int idx = d ? d->field_index(e.field) : -1;
      if (idx < 0)
        return "record '" + r.node_type + "' has no field '" + e.field + "'";
      return r.fields[static_cast<size_t>(idx)];
    }
    case Expr::Kind::Unop: {
      EvalResult sub = eval_expr(state, prog, *e.lhs, opts);
      if (std::holds_alternative<std::string>(sub)) return sub;
      Value v = std::get<Value>(sub);
      if (e.op == "!") {
        if (!v.is_bool()) return type_fault("!");
        return Value::boolean(!v.as_bool());
      }
      if (e.op == "-") {
        if (!v.is_int()) return type_fault("-");
        int64_t out;
        if (!__builtin_sub_overflow(int64_t{0}, v.as_int(), &out)) return Value::integer(out);
        if (opts.overflow == InterpOptions::Overflow::Wrap)
          return Value::integer(v.as_int());  // -INT64_MIN wraps to itself
        return std::string("integer overflow in unary '-'");
      }
      return "unknown unary operator '" + e.op + "'";
    }
    case Expr::Kind::Binop: {
      // Short-circuit booleans first.
      if (e.op == "&&" || e.op == "||") {
        EvalResult lr = eval_expr(state, prog, *e.lhs, opts);
        if (std::holds_alternative<std::string>(lr)) return lr;
        Value lv = std::get<Value>(lr);
        if (!lv.is_bool()) return type_fault(e.op);
        if (e.op == "&&" && !lv.as_bool()) return Value::boolean(false);
        if (e.op == "||" && lv.as_bool()) return Value::boolean(true);
        EvalResult rr = eval_expr(state, prog, *e.rhs, opts);
        if (std::holds_alternative<std::string>(rr)) return rr;
        Value rv = std::get<Value>(rr);
        if (!rv.is_bool()) return type_fault(e.op);
        return rv;
      }
      EvalResult lr = eval_expr(state, prog, *e.lhs, opts);
      if (std::holds_alternative<std::string>(lr)) return lr;
      EvalResult rr = eval_expr(state, prog, *e.rhs, opts);
      if (std::holds_alternative<std::string>(rr)) return rr;
      Value a = std::get<Value>(lr), b = std::get<Value>(rr);
      if (e.op == "=" || e.op == "!=") {
        // Equality is defined on same-sorted values; null compares with
        // references.
        bool comparable = (a.is_int() && b.is_int()) || (a.is_bool() && b.is_bool()) ||
                          ((a.is_loc() || a.is_null()) && (b.is_loc() || b.is_null()));
        if (!comparable) return type_fault(e.op);
        bool eq = a == b;
        return Value::boolean(e.op == "=" ? eq : !eq);
      }
      if (e.op == "<" || e.op == "<=" || e.op == ">" || e.op == ">=") {
        if (!a.is_int() || !b.is_int()) return type_fault(e.op);
        int64_t x = a.as_int(), y = b.as_int();
        bool res = e.op == "<" ? x < y : e.op == "<=" ? x <= y : e.op == ">" ? x > y : x >= y;
        return Value::boolean(res);
      }
      if (e.op == "+" || e.op == "-" || e.op == "*") {
        if (!a.is_int() || !b.is_int()) return type_fault(e.op);
        int64_t out;
        if (checked_arith(e.op, a.as_int(), b.as_int(), out)) return Value::integer(out);
        if (opts.overflow == InterpOptions::Overflow::Wrap) {
          uint64_t ua = static_cast<uint64_t>(a.as_int()), ub = static_cast<uint64_t>(b.as_int());
          uint64_t uo = e.op == "+" ? ua + ub : e.op == "-" ? ua - ub : ua * ub;
          return Value::integer(static_cast<int64_t>(uo));
        }
        return "integer overflow in '" + e.op + "'";
      }
      return "unknown operator '" + e.op + "'";
    }
  }
  return std::string("malformed expression");
}

namespace {

Halted fault(int pc, std::string why) { return Halted{HaltKind::Fault, pc, std::move(why)}; }

// Evaluates a jump target; - 1 encodes a fault (reason filled in).
int jump_target(const ConcreteConfig& cfg, const Expr& e, const InterpOptions& opts,
                std::string& why) {
  EvalResult r = eval_expr(cfg.state, *cfg.prog, e, opts);
  if (std::holds_alternative<std::string>(r)) {
    why = std::get<std::string>(r);
    return -1;
  }
  Value v = std::get<Value>(r);
  if (!v.is_int()) {
    why = "jump target is not an integer";
    return -1;
  }
  int64_t t = v.as_int();
  // Jumping one past the last statement is a normal exit.
  if (t < 0 || t > static_cast<int64_t>(cfg.prog->stmts.size())) {
    why = "jump target " + std::to_string(t) + " out of range";
    return -1;
  }
  return static_cast<int>(t);
}

}  // namespace

StepResult step(const ConcreteConfig& cfg, const InterpOptions& opts) {
  const Program& prog = *cfg.prog;
  if (cfg.pc == static_cast<int>(prog.stmts.size()))
    return Halted{HaltKind::Exit, cfg.pc, {}};
  if (cfg.pc < 0 || cfg.pc > static_cast<int>(prog.stmts.size()))
    return fault(cfg.pc, "program counter out of range");
  const Statement& s = prog.stmts[static_cast<size_t>(cfg.pc)];
  ConcreteConfig next = cfg;
  next.pc = cfg.pc + 1;

  switch (s.kind) {
    case Statement::Kind::Assign: {
      EvalResult r = eval_expr(cfg.state, prog, *s.expr, opts);
      if (std::holds_alternative<std::string>(r))
        return fault(cfg.pc, std::get<std::string>(r));
      next.state.stack[s.var] = std::get<Value>(r);
      return next;
    }
    case Statement::Kind::Store: {
      auto it = cfg.state.stack.find(s.var);
      if (it == cfg.state.stack.end())
        return fault(cfg.pc, "read of unbound variable '" + s.var + "'");
      if (it->second.is_null())
        return fault(cfg.pc, "null dereference at '" + s.var + "." + s.field + "'");
      if (!it->second.is_loc())
        return fault(cfg.pc, "dereference of non-reference '" + s.var + "'");
      auto hit = next.state.heap.find(it->second.as_loc());
      if (hit == next.state.heap.end())
        return fault(cfg.pc, "dangling reference at '" + s.var + "." + s.field + "'");
      const DataDecl* d = prog.find_decl(hit->second.node_type);
      int idx = d ? d->field_index(s.field) : -1;
      if (idx < 0)
        return fault(cfg.pc, "record '" + hit->second.node_type + "' has no field '" +
                                 s.field + "'");
      EvalResult r = eval_expr(cfg.state, prog, *s.expr, opts);
      if (std::holds_alternative<std::string>(r))
        return fault(cfg.pc, std::get<std::string>(r));
      hit->second.fields[static_cast<size_t>(idx)] = std::get<Value>(r);
      return next;
    }
    case Statement::Kind::Goto: {
      std::string why;
      int t = jump_target(cfg, *s.expr, opts, why);
      if (t < 0) return fault(cfg.pc, why);
      next.pc = t;
      return next;
    }
    case Statement::Kind::Assert: {
      EvalResult r = eval_expr(cfg.state, prog, *s.expr, opts);
      if (std::holds_alternative<std::string>(r))
        return fault(cfg.pc, std::get<std::string>(r));
      Value v = std::get<Value>(r);
      if (!v.is_bool()) return fault(cfg.pc, "assert on non-boolean");
      if (!v.as_bool()) return Halted{HaltKind::Assertion, cfg.pc, "assertion failed"};
      return next;
    }
    case Statement::Kind::Cond: {
      EvalResult r = eval_expr(cfg.state, prog, *s.expr, opts);
      if (std::holds_alternative<std::string>(r))
        return fault(cfg.pc, std::get<std::string>(r));
      Value v = std::get<Value>(r);
      if (!v.is_bool()) return fault(cfg.pc, "conditional on non-boolean");
      std::string why;
      int t = jump_target(cfg, v.as_bool() ? *s.then_target : *s.else_target, opts, why);
      if (t < 0) return fault(cfg.pc, why);
      next.pc = t;
      return next;
    }
    case Statement::Kind::New: {
      const DataDecl* d = prog.find_decl(s.node_type);
      if (!d) return fault(cfg.pc, "unknown record '" + s.node_type + "'");
      Record rec;
      rec.node_type = s.node_type;
      for (const auto& a : s.args) {
        auto it = cfg.state.stack.find(a);
        if (it == cfg.state.stack.end())
          return fault(cfg.pc, "read of unbound variable '" + a + "'");
        rec.fields.push_back(it->second);
      }
      Loc l{cfg.next_loc};
      next.next_loc = cfg.next_loc + 1;
      next.state.heap[l] = std::move(rec);
      next.state.stack[s.var] = Value::loc(l);
      return next;
    }
    case Statement::Kind::Free: {
      auto it = cfg.state.stack.find(s.var);
      if (it == cfg.state.stack.end())
        return fault(cfg.pc, "read of unbound variable '" + s.var + "'");
      if (it->second.is_null()) return fault(cfg.pc, "free of null");
      if (!it->second.is_loc()) return fault(cfg.pc, "free of non-reference");
      auto hit = next.state.heap.find(it->second.as_loc());
      if (hit == next.state.heap.end()) return fault(cfg.pc, "double free");
      next.state.heap.erase(hit);
      return next;
    }
  }
  return fault(cfg.pc, "malformed statement");
}

Trace run(const Program& prog, const ConcreteState& init, uint64_t fuel,
          const InterpOptions& opts) {
  Trace tr;
  ConcreteConfig cfg;
  cfg.prog = &prog;
  cfg.state = init;
  // Start fresh location numbering above any location present in the input.
  for (const auto& [l, r] : init.heap) {
    (void)r;
    if (l.id >= cfg.next_loc) cfg.next_loc = l.id + 1;
  }
  while (true) {
    if (tr.steps >= fuel) {
      tr.halt = Halted{HaltKind::Timeout, cfg.pc, "fuel exhausted"};
      tr.final_state = cfg.state;
      return tr;
    }
    if (cfg.pc < static_cast<int>(prog.stmts.size())) {
      tr.pcs.push_back(cfg.pc);
      const Statement& s = prog.stmts[static_cast<size_t>(cfg.pc)];
      if (s.kind == Statement::Kind::Cond) {
        // Record the branch direction the interpreter is about to take.
        EvalResult r = eval_expr(cfg.state, prog, *s.expr, opts);
        if (std::holds_alternative<Value>(r) && std::get<Value>(r).is_bool())
          tr.branches.push_back({cfg.pc, std::get<Value>(r).as_bool()});
      }
    }
    StepResult sr = step(cfg, opts);
    ++tr.steps;
    if (std::holds_alternative<Halted>(sr)) {
      tr.halt = std::get<Halted>(sr);
      tr.final_state = cfg.state;
      return tr;
    }
    cfg = std::move(std::get<ConcreteConfig>(sr));
  }
}

}  // namespace sepgen::il
