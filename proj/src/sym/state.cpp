#include "sepgen/sym/state.hpp"

#include <cassert>

#include "sepgen/solver/pure.hpp"

namespace sepgen::sym {

namespace il = sepgen::il;
namespace sl = sepgen::sl;

namespace {

std::string type_fault(const std::string& op) {
  return "type mismatch in '" + op + "'";
}

// -- Assumption algebra ------------------------------------------------------

Assumption merge(const Assumption& a, const Assumption& b) {
  Assumption out = a;
  out.lits.insert(out.lits.end(), b.lits.begin(), b.lits.end());
  if (!out.arith)
    out.arith = b.arith;
  else if (b.arith && !b.arith->is_true())
    out.arith = sl::Arith::mk_and(out.arith, b.arith);
  return out;
}

std::vector<Assumption> cross(const std::vector<Assumption>& xs,
                              const std::vector<Assumption>& ys) {
  std::vector<Assumption> out;
  for (const auto& x : xs)
    for (const auto& y : ys) out.push_back(merge(x, y));
  return out;
}

// Faults of a subexpression that is only reached under one of `guards`.
std::vector<FaultAlt> guarded(const std::vector<Assumption>& guards,
                              const std::vector<FaultAlt>& faults) {
  std::vector<FaultAlt> out;
  for (const auto& g : guards)
    for (const auto& f : faults) out.push_back({merge(g, f.guard), f.reason});
  return out;
}

void append(std::vector<Assumption>& dst, const std::vector<Assumption>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

void append(std::vector<FaultAlt>& dst, const std::vector<FaultAlt>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

Assumption lit_assume(bool positive, sl::Term l, sl::Term r) {
  Assumption a;
  a.lits.push_back({positive, std::move(l), std::move(r)});
  return a;
}

Assumption arith_assume(sl::ArithAtom::Op op, sl::LinExpr e) {
  sl::ArithAtom at;
  at.op = op;
  at.expr = std::move(e);
  Assumption a;
  a.arith = sl::Arith::mk_atom(std::move(at));
  return a;
}

sl::LinExpr plus_const(sl::LinExpr e, int64_t k) {
  e.add(sl::LinExpr::constant(k));
  return e;
}

// Truth split of a 0/1-valued linear expression.
BoolSplit value_split(const sl::LinExpr& e) {
  BoolSplit sp;
  sp.when_true.push_back(arith_assume(sl::ArithAtom::Op::Eq, plus_const(e, -1)));
  sp.when_false.push_back(arith_assume(sl::ArithAtom::Op::Eq, e));
  return sp;
}

bool statically_bool(const SymbolicConfig& cfg, const il::Program& prog,
                     const il::Expr& e) {
  if (is_bool_op(e)) return true;
  auto t = expr_type(cfg, prog, e);
  return t && t->kind == il::Type::Kind::Bool;
}

}  // namespace

bool is_bool_op(const il::Expr& e) {
  if (e.kind == il::Expr::Kind::Unop) return e.op == "!";
  if (e.kind != il::Expr::Kind::Binop) return false;
  return e.op == "&&" || e.op == "||" || e.op == "=" || e.op == "!=" ||
         e.op == "<" || e.op == "<=" || e.op == ">" || e.op == ">=";
}

std::optional<il::Type> expr_type(const SymbolicConfig& cfg,
                                  const il::Program& prog, const il::Expr& e) {
  switch (e.kind) {
    case il::Expr::Kind::IntConst: return il::Type::integer();
    case il::Expr::Kind::BoolConst: return il::Type::boolean();
    case il::Expr::Kind::Null: return il::Type::node_of("");
    case il::Expr::Kind::Var: {
      auto it = cfg.types.find(e.var);
      if (it == cfg.types.end()) return std::nullopt;
      return it->second;
    }
    case il::Expr::Kind::FieldLoad: {
      auto it = cfg.types.find(e.var);
      if (it == cfg.types.end() || !it->second.is_node()) return std::nullopt;
      const il::DataDecl* d = prog.find_decl(it->second.node);
      if (!d) return std::nullopt;
      int idx = d->field_index(e.field);
      if (idx < 0) return std::nullopt;
      return d->fields[static_cast<size_t>(idx)].second;
    }
    case il::Expr::Kind::Unop:
      return e.op == "!" ? il::Type::boolean() : il::Type::integer();
    case il::Expr::Kind::Binop:
      if (e.op == "+" || e.op == "-" || e.op == "*") return il::Type::integer();
      return il::Type::boolean();
  }
  return std::nullopt;
}

int resolve_cell(const sl::SymHeap& delta, const sl::Term& t) {
  solver::Congruence c(delta);
  if (c.same(t, sl::Term::null())) return kNull;
  for (size_t i = 0; i < delta.spatial.size(); ++i)
    if (const auto* p = std::get_if<sl::PointsTo>(&delta.spatial[i]))
      if (c.same(p->root, t)) return static_cast<int>(i);
  return kNoCell;
}

RefClass classify_ref(const SymbolicConfig& cfg, const sl::Term& t) {
  solver::Congruence c(cfg.delta);
  if (c.same(t, sl::Term::null())) return {RefClass::Kind::Null, kNoCell};
  for (const auto& fr : cfg.freed)
    if (c.same(fr, t)) return {RefClass::Kind::Dangling, kNoCell};
  for (size_t i = 0; i < cfg.delta.spatial.size(); ++i)
    if (const auto* p = std::get_if<sl::PointsTo>(&cfg.delta.spatial[i]))
      if (c.same(p->root, t))
        return {RefClass::Kind::Cell, static_cast<int>(i)};
  return {RefClass::Kind::Unknown, kNoCell};
}

void assume(sl::SymHeap& h, const Assumption& a) {
  for (const auto& l : a.lits) sl::conjoin(h, l);
  if (a.arith && !a.arith->is_true()) sl::conjoin(h, a.arith);
}

std::set<std::string> names_in_use(const SymbolicConfig& cfg) {
  std::set<std::string> out;
  sl::collect_all_vars(cfg.delta, out);
  sl::collect_all_vars(cfg.input, out);
  for (const auto& [v, arg] : cfg.stack) {
    if (const auto* t = std::get_if<sl::Term>(&arg)) {
      if (t->is_var()) out.insert(t->var);
    } else {
      for (const auto& [name, c] : std::get<sl::LinExpr>(arg).coeff) {
        (void)c;
        out.insert(name);
      }
    }
  }
  for (const auto& fr : cfg.freed)
    if (fr.is_var()) out.insert(fr.var);
  return out;
}

EvalOutcome sym_eval(const SymbolicConfig& cfg, const il::Program& prog,
                     const il::Expr& e) {
  switch (e.kind) {
    case il::Expr::Kind::IntConst:
      return sl::Arg{sl::LinExpr::constant(e.int_val)};
    case il::Expr::Kind::BoolConst:
      return sl::Arg{sl::LinExpr::constant(e.bool_val ? 1 : 0)};
    case il::Expr::Kind::Null: return sl::Arg{sl::Term::null()};
    case il::Expr::Kind::Var: {
      auto it = cfg.stack.find(e.var);
      if (it == cfg.stack.end())
        return EvalFault{"read of unbound variable '" + e.var + "'"};
      return it->second;
    }
    case il::Expr::Kind::FieldLoad: {
      auto it = cfg.stack.find(e.var);
      if (it == cfg.stack.end())
        return EvalFault{"read of unbound variable '" + e.var + "'"};
      const auto* base = std::get_if<sl::Term>(&it->second);
      if (!base)
        return EvalFault{"dereference of non-reference '" + e.var + "'"};
      RefClass rc = classify_ref(cfg, *base);
      switch (rc.kind) {
        case RefClass::Kind::Null:
          return EvalFault{"null dereference at '" + e.var + "." + e.field +
                           "'"};
        case RefClass::Kind::Dangling:
          return EvalFault{"dangling reference at '" + e.var + "." + e.field +
                           "'"};
        case RefClass::Kind::Unknown: {
          auto ty = cfg.types.find(e.var);
          if (ty == cfg.types.end() || !ty->second.is_node())
            return EvalFault{"dereference of non-reference '" + e.var + "'"};
          return NeedsInit{e.var, ty->second.node};
        }
        case RefClass::Kind::Cell: break;
      }
      const auto& cell =
          std::get<sl::PointsTo>(cfg.delta.spatial[static_cast<size_t>(rc.index)]);
      const il::DataDecl* d = prog.find_decl(cell.node_type);
      int idx = d ? d->field_index(e.field) : -1;
      if (idx < 0)
        return EvalFault{"record '" + cell.node_type + "' has no field '" +
                         e.field + "'"};
      return cell.fields[static_cast<size_t>(idx)];
    }
    case il::Expr::Kind::Unop: {
      if (e.op == "!")
        return EvalFault{"boolean operator in value position"};  // lowered by callers
      EvalOutcome sub = sym_eval(cfg, prog, *e.lhs);
      if (!std::holds_alternative<sl::Arg>(sub)) return sub;
      if (e.op != "-") return EvalFault{"unknown unary operator '" + e.op + "'"};
      const auto* v = std::get_if<sl::LinExpr>(&std::get<sl::Arg>(sub));
      if (!v || statically_bool(cfg, prog, *e.lhs))
        return EvalFault{type_fault("-")};
      return sl::Arg{v->negated()};
    }
    case il::Expr::Kind::Binop: {
      if (is_bool_op(e))
        return EvalFault{"boolean operator in value position"};  // lowered by callers
      if (e.op != "+" && e.op != "-" && e.op != "*")
        return EvalFault{"unknown operator '" + e.op + "'"};
      EvalOutcome lo = sym_eval(cfg, prog, *e.lhs);
      if (!std::holds_alternative<sl::Arg>(lo)) return lo;
      EvalOutcome ro = sym_eval(cfg, prog, *e.rhs);
      if (!std::holds_alternative<sl::Arg>(ro)) return ro;
      const auto* a = std::get_if<sl::LinExpr>(&std::get<sl::Arg>(lo));
      const auto* b = std::get_if<sl::LinExpr>(&std::get<sl::Arg>(ro));
      if (!a || !b || statically_bool(cfg, prog, *e.lhs) ||
          statically_bool(cfg, prog, *e.rhs))
        return EvalFault{type_fault(e.op)};
      if (e.op == "*") {
        // Only linear products have a symbolic representation.
        if (!a->is_const() && !b->is_const())
          throw std::runtime_error(
              "symbolic execution cannot represent a product of two "
              "variables");
        sl::LinExpr out;
        if (b->is_const())
          out.add(*a, b->k);
        else
          out.add(*b, a->k);
        return sl::Arg{out};
      }
      sl::LinExpr out = *a;
      out.add(*b, e.op == "+" ? 1 : -1);
      return sl::Arg{out};
    }
  }
  return EvalFault{"malformed expression"};
}

namespace {

// Comparison of two integer expressions; d is lhs - rhs.
BoolSplit int_compare(const std::string& op, const sl::LinExpr& d) {
  using Op = sl::ArithAtom::Op;
  BoolSplit sp;
  if (op == "=") {
    sp.when_true.push_back(arith_assume(Op::Eq, d));
    sp.when_false.push_back(arith_assume(Op::Le, plus_const(d, 1)));
    sp.when_false.push_back(arith_assume(Op::Le, plus_const(d.negated(), 1)));
  } else if (op == "!=") {
    sp.when_true.push_back(arith_assume(Op::Le, plus_const(d, 1)));
    sp.when_true.push_back(arith_assume(Op::Le, plus_const(d.negated(), 1)));
    sp.when_false.push_back(arith_assume(Op::Eq, d));
  } else if (op == "<") {
    sp.when_true.push_back(arith_assume(Op::Le, plus_const(d, 1)));
    sp.when_false.push_back(arith_assume(Op::Le, d.negated()));
  } else if (op == "<=") {
    sp.when_true.push_back(arith_assume(Op::Le, d));
    sp.when_false.push_back(arith_assume(Op::Le, plus_const(d.negated(), 1)));
  } else if (op == ">") {
    sp.when_true.push_back(arith_assume(Op::Le, plus_const(d.negated(), 1)));
    sp.when_false.push_back(arith_assume(Op::Le, d));
  } else {  // ">="
    sp.when_true.push_back(arith_assume(Op::Le, d.negated()));
    sp.when_false.push_back(arith_assume(Op::Le, plus_const(d, 1)));
  }
  return sp;
}

}  // namespace

BoolOutcome sym_bool(const SymbolicConfig& cfg, const il::Program& prog,
                     const il::Expr& e) {
  // Negation: swap the polarities.
  if (e.kind == il::Expr::Kind::Unop && e.op == "!") {
    BoolOutcome sub = sym_bool(cfg, prog, *e.lhs);
    if (auto* f = std::get_if<EvalFault>(&sub)) {
      if (f->reason == kNonBoolean) f->reason = type_fault("!");
      return sub;
    }
    if (!std::holds_alternative<BoolSplit>(sub)) return sub;
    BoolSplit& sp = std::get<BoolSplit>(sub);
    std::swap(sp.when_true, sp.when_false);
    return sub;
  }

  if (e.kind == il::Expr::Kind::Binop && (e.op == "&&" || e.op == "||")) {
    BoolOutcome lo = sym_bool(cfg, prog, *e.lhs);
    if (auto* f = std::get_if<EvalFault>(&lo)) {
      if (f->reason == kNonBoolean) f->reason = type_fault(e.op);
      return lo;
    }
    if (!std::holds_alternative<BoolSplit>(lo)) return lo;
    const BoolSplit& l = std::get<BoolSplit>(lo);
    // Short circuit: the right side only runs when the left side does not
    // already decide the result.
    const std::vector<Assumption>& continues =
        e.op == "&&" ? l.when_true : l.when_false;
    if (continues.empty()) return lo;

    BoolOutcome ro = sym_bool(cfg, prog, *e.rhs);
    if (std::holds_alternative<NeedsInit>(ro)) return ro;
    BoolSplit r;
    if (auto* f = std::get_if<EvalFault>(&ro)) {
      // The fault happens exactly when the right side gets evaluated.
      std::string why = f->reason == kNonBoolean ? type_fault(e.op) : f->reason;
      r.faults.push_back({Assumption{}, std::move(why)});
    } else {
      r = std::get<BoolSplit>(ro);
    }

    BoolSplit out;
    out.faults = l.faults;
    append(out.faults, guarded(continues, r.faults));
    if (e.op == "&&") {
      out.when_true = cross(l.when_true, r.when_true);
      out.when_false = l.when_false;
      append(out.when_false, cross(l.when_true, r.when_false));
    } else {
      out.when_true = l.when_true;
      append(out.when_true, cross(l.when_false, r.when_true));
      out.when_false = cross(l.when_false, r.when_false);
    }
    return out;
  }

  if (e.kind == il::Expr::Kind::Binop &&
      (e.op == "=" || e.op == "!=" || e.op == "<" || e.op == "<=" ||
       e.op == ">" || e.op == ">=")) {
    // Evaluate left then right, in the interpreter's order, so the first
    // fault wins; type mismatches only surface once both sides evaluate.
    bool lb = statically_bool(cfg, prog, *e.lhs);
    bool rb = statically_bool(cfg, prog, *e.rhs);
    BoolSplit lsp, rsp;
    sl::Arg la, ra;
    for (int side = 0; side < 2; ++side) {
      const il::Expr& sub = side == 0 ? *e.lhs : *e.rhs;
      if (side == 0 ? lb : rb) {
        BoolOutcome o = sym_bool(cfg, prog, sub);
        if (!std::holds_alternative<BoolSplit>(o)) return o;
        (side == 0 ? lsp : rsp) = std::get<BoolSplit>(o);
      } else {
        EvalOutcome o = sym_eval(cfg, prog, sub);
        if (auto* n = std::get_if<NeedsInit>(&o)) return *n;
        if (auto* f = std::get_if<EvalFault>(&o)) return *f;
        (side == 0 ? la : ra) = std::get<sl::Arg>(o);
      }
    }

    if (lb || rb) {
      // Boolean equality: a = b  <=>  (a && b) || (!a && !b).  Order
      // comparisons are not defined on booleans, nor is equality across
      // booleans and anything else.
      if (!lb || !rb || (e.op != "=" && e.op != "!="))
        return EvalFault{type_fault(e.op)};
      BoolSplit out;
      out.faults = lsp.faults;
      append(out.faults, rsp.faults);  // both sides evaluate eagerly
      out.when_true = cross(lsp.when_true, rsp.when_true);
      append(out.when_true, cross(lsp.when_false, rsp.when_false));
      out.when_false = cross(lsp.when_true, rsp.when_false);
      append(out.when_false, cross(lsp.when_false, rsp.when_true));
      if (e.op == "!=") std::swap(out.when_true, out.when_false);
      return out;
    }

    if (std::holds_alternative<sl::Term>(la) &&
        std::holds_alternative<sl::Term>(ra)) {
      if (e.op != "=" && e.op != "!=") return EvalFault{type_fault(e.op)};
      const auto& ta = std::get<sl::Term>(la);
      const auto& tb = std::get<sl::Term>(ra);
      BoolSplit sp;
      sp.when_true.push_back(lit_assume(e.op == "=", ta, tb));
      sp.when_false.push_back(lit_assume(e.op != "=", ta, tb));
      return sp;
    }
    if (std::holds_alternative<sl::LinExpr>(la) &&
        std::holds_alternative<sl::LinExpr>(ra)) {
      sl::LinExpr d = std::get<sl::LinExpr>(la);
      d.add(std::get<sl::LinExpr>(ra), -1);
      return int_compare(e.op, d);
    }
    return EvalFault{type_fault(e.op)};
  }

  // A value that should be boolean: a variable, a field load, a constant.
  if (e.kind == il::Expr::Kind::BoolConst) {
    BoolSplit sp;
    (e.bool_val ? sp.when_true : sp.when_false).push_back(Assumption{});
    return sp;
  }
  EvalOutcome v = sym_eval(cfg, prog, e);
  if (auto* n = std::get_if<NeedsInit>(&v)) return *n;
  if (auto* f = std::get_if<EvalFault>(&v)) return *f;
  if (!statically_bool(cfg, prog, e)) return EvalFault{kNonBoolean};
  const auto* le = std::get_if<sl::LinExpr>(&std::get<sl::Arg>(v));
  if (!le) return EvalFault{kNonBoolean};
  return value_split(*le);
}

}  // namespace sepgen::sym
