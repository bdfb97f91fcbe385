#include "sepgen/sym/exec.hpp"

#include <cctype>
#include <stdexcept>

#include "sepgen/lazy/enumerate.hpp"
#include "sepgen/solver/base.hpp"
#include "sepgen/solver/pure.hpp"

namespace sepgen::sym {

namespace il = sepgen::il;
namespace sl = sepgen::sl;

namespace {

using Status = PathOutcome::Status;

void clear_marks(sl::SymHeap& h) {
  for (auto& sa : h.spatial)
    if (auto* p = std::get_if<sl::PredApp>(&sa)) p->marked = false;
}

sl::ArithPtr le_zero(sl::LinExpr e) {
  sl::ArithAtom at;
  at.op = sl::ArithAtom::Op::Le;
  at.expr = std::move(e);
  return sl::Arith::mk_atom(std::move(at));
}

struct Explorer {
  const il::Program& prog;
  const ExploreOptions& opts;
  ExploreResult res;
  std::vector<SymbolicConfig> work;

  Explorer(const il::Program& p, const ExploreOptions& o) : prog(p), opts(o) {}

  // --- bookkeeping -----------------------------------------------------

  bool feasible(SymbolicConfig& c) {
    auto r = solver::check_sat(c.delta, res.env, opts.solver);
    if (r.status == solver::SatResult::Unsat) {
      ++res.stats.pruned_infeasible;
      return false;
    }
    if (r.status == solver::SatResult::Unknown) c.feasibility_unknown = true;
    return true;
  }

  // Assume `a` on the path; returns false (and counts the prune) when the
  // result is unsatisfiable.  Trivial assumptions skip the solver.
  bool constrain(SymbolicConfig& c, const Assumption& a) {
    if (a.trivial()) return true;
    assume(c.delta, a);
    return feasible(c);
  }

  void finish(SymbolicConfig&& c, Status st, std::string note) {
    PathOutcome o;
    o.status = st;
    o.delta = std::move(c.delta);
    o.input = std::move(c.input);
    o.stack = std::move(c.stack);
    o.branches = std::move(c.branches);
    o.pcs = std::move(c.pcs);
    o.note = std::move(note);
    o.feasibility_unknown = c.feasibility_unknown;
    o.provenance = std::move(c.provenance);
    res.outcomes.push_back(std::move(o));
  }

  void fault(SymbolicConfig&& c, std::string why) {
    finish(std::move(c), Status::Fault, std::move(why));
  }

  // Fault alternatives of a boolean split, each under its guard.
  void emit_faults(const SymbolicConfig& cfg, const std::vector<FaultAlt>& fs) {
    for (const auto& fa : fs) {
      SymbolicConfig c2 = cfg;
      if (constrain(c2, fa.guard)) fault(std::move(c2), fa.reason);
    }
  }

  // Push children so that children[0] is explored first.
  void push(std::vector<SymbolicConfig>&& cs) {
    for (auto it = cs.rbegin(); it != cs.rend(); ++it)
      work.push_back(std::move(*it));
  }

  // Transfer control to `target`, counting back edges against the loop
  // bound.  `from` is the statement performing the jump.
  void jump(SymbolicConfig&& c, int from, int target,
            std::vector<SymbolicConfig>& kids) {
    if (target <= from) {
      int& cnt = c.back_edges[target];
      if (++cnt > opts.loop_bound) {
        finish(std::move(c), Status::DepthBounded,
               "loop bound reached at statement " + std::to_string(target));
        return;
      }
    }
    c.pc = target;
    kids.push_back(std::move(c));
  }

  // Evaluated jump target, or -1 with `why` set.  Targets outside linear
  // constants are not representable symbolically.
  int target_of(const SymbolicConfig& cfg, const il::Expr& e,
                std::string& why) {
    EvalOutcome v = sym_eval(cfg, prog, e);
    if (auto* f = std::get_if<EvalFault>(&v)) {
      why = f->reason;
      return -1;
    }
    if (std::holds_alternative<NeedsInit>(v))
      throw std::runtime_error("jump target depends on the heap");
    const auto* le = std::get_if<sl::LinExpr>(&std::get<sl::Arg>(v));
    if (!le) {
      why = "jump target is not an integer";
      return -1;
    }
    if (!le->is_const())
      throw std::runtime_error("computed jump targets are not supported");
    int64_t t = le->k;
    if (t < 0 || t > static_cast<int64_t>(prog.stmts.size())) {
      why = "jump target " + std::to_string(t) + " out of range";
      return -1;
    }
    return static_cast<int>(t);
  }

  // --- lazy initialization ----------------------------------------------

  // The statement at cfg.pc touched a reference with no matching cell:
  // branch over its possible shapes and retry the statement in each.
  void do_enum(SymbolicConfig&& cfg, const NeedsInit& ni) {
    ++res.stats.enum_calls;
    // The statement retries after initialization; drop its trace entry so
    // the retry does not record it twice.
    if (!cfg.pcs.empty()) cfg.pcs.pop_back();
    const auto& arg = cfg.stack.at(ni.base_var);
    const sl::Term& x = std::get<sl::Term>(arg);
    auto dit = cfg.chain_depth.find(x.var);
    int depth = dit == cfg.chain_depth.end() ? 1 : dit->second;
    if (depth > opts.depth) {
      finish(std::move(cfg), Status::DepthBounded,
             "initialization depth bound at '" + ni.base_var + "'");
      return;
    }

    std::map<std::string, sl::Term> refs;
    for (const auto& [v, a] : cfg.stack)
      if (const auto* t = std::get_if<sl::Term>(&a)) refs.emplace(v, *t);

    std::set<std::string> before;
    sl::collect_all_vars(cfg.delta, before);
    sl::collect_all_vars(cfg.input, before);

    lazy::EnumContext ec{cfg.delta, cfg.input, cfg.provenance};
    lazy::EnumOptions eo;
    eo.lfp.iter_cap = opts.lfp_iter_cap;
    eo.lfp.solver = opts.solver;
    eo.decls = &prog.decls;
    lazy::EnumResult er = lazy::enumerate_values(ni.base_var, refs, ec,
                                                 ni.node_type, res.env, eo,
                                                 &cfg.next_occ);
    if (er.scenario == 1)
      throw std::logic_error(
          "lazy initialization requested for an initialized value");

    std::vector<SymbolicConfig> kids;
    for (auto& ctx : er.contexts) {
      SymbolicConfig c2 = cfg;  // same pc: the statement is retried
      c2.delta = std::move(ctx.delta);
      c2.input = std::move(ctx.input);
      c2.provenance = std::move(ctx.provenance);
      clear_marks(c2.delta);
      clear_marks(c2.input);
      std::set<std::string> after;
      sl::collect_all_vars(c2.delta, after);
      sl::collect_all_vars(c2.input, after);
      for (const auto& nv : after)
        if (!before.count(nv)) c2.chain_depth[nv] = depth + 1;
      kids.push_back(std::move(c2));
    }
    if (kids.empty()) ++res.stats.pruned_infeasible;
    push(std::move(kids));
  }

  // --- statement handlers -----------------------------------------------

  void do_assign(SymbolicConfig&& cfg, const il::Statement& s) {
    if (is_bool_op(*s.expr)) {
      BoolOutcome b = sym_bool(cfg, prog, *s.expr);
      if (auto* ni = std::get_if<NeedsInit>(&b)) {
        do_enum(std::move(cfg), *ni);
        return;
      }
      if (auto* f = std::get_if<EvalFault>(&b)) {
        fault(std::move(cfg), f->reason == kNonBoolean
                                  ? "type mismatch in '" + s.expr->op + "'"
                                  : f->reason);
        return;
      }
      const BoolSplit& sp = std::get<BoolSplit>(b);
      emit_faults(cfg, sp.faults);
      std::vector<SymbolicConfig> kids;
      auto bind = [&](const Assumption& a, int64_t val) {
        SymbolicConfig c2 = cfg;
        if (!constrain(c2, a)) return;
        c2.stack[s.var] = sl::Arg{sl::LinExpr::constant(val)};
        c2.types[s.var] = il::Type::boolean();
        ++c2.pc;
        kids.push_back(std::move(c2));
      };
      for (const auto& a : sp.when_true) bind(a, 1);
      for (const auto& a : sp.when_false) bind(a, 0);
      push(std::move(kids));
      return;
    }

    EvalOutcome v = sym_eval(cfg, prog, *s.expr);
    if (auto* ni = std::get_if<NeedsInit>(&v)) {
      do_enum(std::move(cfg), *ni);
      return;
    }
    if (auto* f = std::get_if<EvalFault>(&v)) {
      fault(std::move(cfg), f->reason);
      return;
    }
    auto ty = expr_type(cfg, prog, *s.expr);
    cfg.stack[s.var] = std::get<sl::Arg>(v);
    cfg.types[s.var] = ty ? *ty : il::Type::integer();
    ++cfg.pc;
    work.push_back(std::move(cfg));
  }

  // Rebind the field: the slot gets a fresh symbol equated to the stored
  // value, so older loads keep referring to the old contents.
  void do_store_arg(SymbolicConfig&& cfg, int cell_idx, int field_idx,
                    const sl::Arg& val, const std::string& field,
                    std::vector<SymbolicConfig>& kids) {
    std::string w = sl::fresh_name(field + "1", names_in_use(cfg));
    auto& cell =
        std::get<sl::PointsTo>(cfg.delta.spatial[static_cast<size_t>(cell_idx)]);
    if (const auto* t = std::get_if<sl::Term>(&val)) {
      cell.fields[static_cast<size_t>(field_idx)] = sl::Term::mk_var(w);
      sl::conjoin(cfg.delta, sl::PureLit{true, sl::Term::mk_var(w), *t});
    } else {
      cell.fields[static_cast<size_t>(field_idx)] = sl::LinExpr::variable(w);
      sl::LinExpr d = sl::LinExpr::variable(w);
      d.add(std::get<sl::LinExpr>(val), -1);
      sl::ArithAtom at;
      at.op = sl::ArithAtom::Op::Eq;
      at.expr = std::move(d);
      sl::conjoin(cfg.delta, sl::Arith::mk_atom(std::move(at)));
    }
    ++cfg.pc;
    kids.push_back(std::move(cfg));
  }

  void do_store(SymbolicConfig&& cfg, const il::Statement& s) {
    auto it = cfg.stack.find(s.var);
    if (it == cfg.stack.end()) {
      fault(std::move(cfg), "read of unbound variable '" + s.var + "'");
      return;
    }
    const auto* base = std::get_if<sl::Term>(&it->second);
    if (!base) {
      fault(std::move(cfg), "dereference of non-reference '" + s.var + "'");
      return;
    }
    RefClass rc = classify_ref(cfg, *base);
    if (rc.kind == RefClass::Kind::Null) {
      fault(std::move(cfg),
            "null dereference at '" + s.var + "." + s.field + "'");
      return;
    }
    if (rc.kind == RefClass::Kind::Dangling) {
      fault(std::move(cfg),
            "dangling reference at '" + s.var + "." + s.field + "'");
      return;
    }
    if (rc.kind == RefClass::Kind::Unknown) {
      auto ty = cfg.types.find(s.var);
      if (ty == cfg.types.end() || !ty->second.is_node()) {
        fault(std::move(cfg), "dereference of non-reference '" + s.var + "'");
        return;
      }
      do_enum(std::move(cfg), NeedsInit{s.var, ty->second.node});
      return;
    }
    const auto& cell =
        std::get<sl::PointsTo>(cfg.delta.spatial[static_cast<size_t>(rc.index)]);
    const il::DataDecl* d = prog.find_decl(cell.node_type);
    int fidx = d ? d->field_index(s.field) : -1;
    if (fidx < 0) {
      fault(std::move(cfg), "record '" + cell.node_type + "' has no field '" +
                                s.field + "'");
      return;
    }

    // The value is evaluated after the cell checks, like the interpreter.
    if (is_bool_op(*s.expr)) {
      BoolOutcome b = sym_bool(cfg, prog, *s.expr);
      if (auto* ni = std::get_if<NeedsInit>(&b)) {
        do_enum(std::move(cfg), *ni);
        return;
      }
      if (auto* f = std::get_if<EvalFault>(&b)) {
        fault(std::move(cfg), f->reason == kNonBoolean
                                  ? "type mismatch in '" + s.expr->op + "'"
                                  : f->reason);
        return;
      }
      const BoolSplit& sp = std::get<BoolSplit>(b);
      emit_faults(cfg, sp.faults);
      std::vector<SymbolicConfig> kids;
      auto store_const = [&](const Assumption& a, int64_t val) {
        SymbolicConfig c2 = cfg;
        if (!constrain(c2, a)) return;
        do_store_arg(std::move(c2), rc.index, fidx,
                     sl::Arg{sl::LinExpr::constant(val)}, s.field, kids);
      };
      for (const auto& a : sp.when_true) store_const(a, 1);
      for (const auto& a : sp.when_false) store_const(a, 0);
      push(std::move(kids));
      return;
    }

    EvalOutcome v = sym_eval(cfg, prog, *s.expr);
    if (auto* ni = std::get_if<NeedsInit>(&v)) {
      do_enum(std::move(cfg), *ni);
      return;
    }
    if (auto* f = std::get_if<EvalFault>(&v)) {
      fault(std::move(cfg), f->reason);
      return;
    }
    std::vector<SymbolicConfig> kids;
    do_store_arg(std::move(cfg), rc.index, fidx, std::get<sl::Arg>(v), s.field,
                 kids);
    push(std::move(kids));
  }

  void do_new(SymbolicConfig&& cfg, const il::Statement& s) {
    const il::DataDecl* d = prog.find_decl(s.node_type);
    if (!d) {
      fault(std::move(cfg), "unknown record '" + s.node_type + "'");
      return;
    }
    std::vector<sl::Arg> fields;
    for (const auto& a : s.args) {
      auto it = cfg.stack.find(a);
      if (it == cfg.stack.end()) {
        fault(std::move(cfg), "read of unbound variable '" + a + "'");
        return;
      }
      fields.push_back(it->second);
    }
    std::string l = sl::fresh_name("l1", names_in_use(cfg));
    sl::PointsTo cell;
    cell.root = sl::Term::mk_var(l);
    cell.node_type = s.node_type;
    cell.fields = std::move(fields);
    cfg.delta.spatial.push_back(std::move(cell));
    cfg.stack[s.var] = sl::Arg{sl::Term::mk_var(l)};
    cfg.types[s.var] = il::Type::node_of(s.node_type);
    ++cfg.pc;
    work.push_back(std::move(cfg));
  }

  void do_free(SymbolicConfig&& cfg, const il::Statement& s) {
    auto it = cfg.stack.find(s.var);
    if (it == cfg.stack.end()) {
      fault(std::move(cfg), "read of unbound variable '" + s.var + "'");
      return;
    }
    const auto* base = std::get_if<sl::Term>(&it->second);
    if (!base) {
      fault(std::move(cfg), "free of non-reference");
      return;
    }
    RefClass rc = classify_ref(cfg, *base);
    if (rc.kind == RefClass::Kind::Null) {
      fault(std::move(cfg), "free of null");
      return;
    }
    if (rc.kind == RefClass::Kind::Dangling) {
      fault(std::move(cfg), "double free");
      return;
    }
    if (rc.kind == RefClass::Kind::Unknown) {
      auto ty = cfg.types.find(s.var);
      if (ty == cfg.types.end() || !ty->second.is_node()) {
        fault(std::move(cfg), "free of non-reference");
        return;
      }
      do_enum(std::move(cfg), NeedsInit{s.var, ty->second.node});
      return;
    }
    // Removing the cell loses the separation facts it implied; keep them,
    // since they still hold of the freed address.
    sl::Term root =
        std::get<sl::PointsTo>(cfg.delta.spatial[static_cast<size_t>(rc.index)])
            .root;
    sl::conjoin(cfg.delta, sl::PureLit{false, root, sl::Term::null()});
    for (size_t i = 0; i < cfg.delta.spatial.size(); ++i) {
      if (static_cast<int>(i) == rc.index) continue;
      if (const auto* q = std::get_if<sl::PointsTo>(&cfg.delta.spatial[i]))
        sl::conjoin(cfg.delta, sl::PureLit{false, root, q->root});
    }
    cfg.delta.spatial.erase(cfg.delta.spatial.begin() + rc.index);
    cfg.freed.push_back(std::move(root));
    ++cfg.pc;
    work.push_back(std::move(cfg));
  }

  void do_goto(SymbolicConfig&& cfg, const il::Statement& s) {
    std::string why;
    int t = target_of(cfg, *s.expr, why);
    if (t < 0) {
      fault(std::move(cfg), std::move(why));
      return;
    }
    std::vector<SymbolicConfig> kids;
    jump(std::move(cfg), s.index, t, kids);
    push(std::move(kids));
  }

  void do_assert(SymbolicConfig&& cfg, const il::Statement& s) {
    BoolOutcome b = sym_bool(cfg, prog, *s.expr);
    if (auto* ni = std::get_if<NeedsInit>(&b)) {
      do_enum(std::move(cfg), *ni);
      return;
    }
    if (auto* f = std::get_if<EvalFault>(&b)) {
      fault(std::move(cfg),
            f->reason == kNonBoolean ? "assert on non-boolean" : f->reason);
      return;
    }
    const BoolSplit& sp = std::get<BoolSplit>(b);
    emit_faults(cfg, sp.faults);
    for (const auto& a : sp.when_false) {
      SymbolicConfig c2 = cfg;
      if (constrain(c2, a))
        finish(std::move(c2), Status::AssertViolation, "assertion failed");
    }
    std::vector<SymbolicConfig> kids;
    for (const auto& a : sp.when_true) {
      SymbolicConfig c2 = cfg;
      if (!constrain(c2, a)) continue;
      ++c2.pc;
      kids.push_back(std::move(c2));
    }
    push(std::move(kids));
  }

  void do_cond(SymbolicConfig&& cfg, const il::Statement& s) {
    BoolOutcome b = sym_bool(cfg, prog, *s.expr);
    if (auto* ni = std::get_if<NeedsInit>(&b)) {
      do_enum(std::move(cfg), *ni);
      return;
    }
    if (auto* f = std::get_if<EvalFault>(&b)) {
      fault(std::move(cfg),
            f->reason == kNonBoolean ? "conditional on non-boolean" : f->reason);
      return;
    }
    const BoolSplit& sp = std::get<BoolSplit>(b);
    emit_faults(cfg, sp.faults);
    std::vector<SymbolicConfig> kids;
    auto take = [&](const Assumption& a, bool taken) {
      SymbolicConfig c2 = cfg;
      if (!constrain(c2, a)) return;
      c2.branches.push_back({s.index, taken});
      std::string why;
      int t = target_of(c2, taken ? *s.then_target : *s.else_target, why);
      if (t < 0) {
        fault(std::move(c2), std::move(why));
        return;
      }
      jump(std::move(c2), s.index, t, kids);
    };
    for (const auto& a : sp.when_true) take(a, true);
    for (const auto& a : sp.when_false) take(a, false);
    push(std::move(kids));
  }

  // --- driver -------------------------------------------------------------

  void step(SymbolicConfig&& cfg) {
    ++res.stats.steps;
    int n = static_cast<int>(prog.stmts.size());
    if (cfg.pc == n) {
      finish(std::move(cfg), Status::Normal, {});
      return;
    }
    if (cfg.pc < 0 || cfg.pc > n) {
      fault(std::move(cfg), "program counter out of range");
      return;
    }
    cfg.pcs.push_back(cfg.pc);
    const il::Statement& s = prog.stmts[static_cast<size_t>(cfg.pc)];
    switch (s.kind) {
      case il::Statement::Kind::Assign: do_assign(std::move(cfg), s); return;
      case il::Statement::Kind::Store: do_store(std::move(cfg), s); return;
      case il::Statement::Kind::Goto: do_goto(std::move(cfg), s); return;
      case il::Statement::Kind::Assert: do_assert(std::move(cfg), s); return;
      case il::Statement::Kind::Cond: do_cond(std::move(cfg), s); return;
      case il::Statement::Kind::New: do_new(std::move(cfg), s); return;
      case il::Statement::Kind::Free: do_free(std::move(cfg), s); return;
    }
    fault(std::move(cfg), "malformed statement");
  }

  void run() {
    while (!work.empty()) {
      if (res.outcomes.size() >= opts.path_limit) {
        res.stats.truncated = true;
        return;
      }
      SymbolicConfig c = std::move(work.back());
      work.pop_back();
      step(std::move(c));
    }
  }
};

}  // namespace

ExploreResult explore(const il::Program& prog, const sl::Formula& pre,
                      const sl::PredEnv& env, const ExploreOptions& opts) {
  Explorer ex(prog, opts);
  ex.res.env = solver::augment_env(env);

  // Bind each parameter to a fresh symbol; parameters are conventionally
  // lowercase, their symbols uppercase.
  std::set<std::string> used;
  for (const auto& d : pre) sl::collect_all_vars(d, used);
  StackMap sigma_args;
  for (const auto& [pn, pt] : prog.params) {
    std::string cand = pn;
    if (!cand.empty())
      cand[0] = static_cast<char>(
          std::toupper(static_cast<unsigned char>(cand[0])));
    std::string sym = sl::fresh_name(cand, used);
    used.insert(sym);
    ex.res.sigma[pn] = sym;
    sigma_args[pn] = pt.is_node() ? sl::Arg{sl::Term::mk_var(sym)}
                                  : sl::Arg{sl::LinExpr::variable(sym)};
  }

  std::vector<SymbolicConfig> roots;
  for (size_t i = 0; i < pre.size(); ++i) {
    SymbolicConfig c;
    c.delta = sl::substitute_many(pre[i], sigma_args);
    c.next_occ = sl::assign_occ_ids(c.delta, 1);
    for (const auto& [pn, pt] : prog.params) {
      if (pt.kind != il::Type::Kind::Bool) continue;
      // Boolean parameters are 0/1-valued.
      sl::LinExpr b = std::get<sl::LinExpr>(sigma_args[pn]);
      sl::conjoin(c.delta, le_zero(b.negated()));
      sl::LinExpr hi = b;
      hi.add(sl::LinExpr::constant(-1));
      sl::conjoin(c.delta, le_zero(hi));
    }
    c.input = c.delta;
    for (const auto& [pn, pt] : prog.params) {
      c.stack[pn] = sigma_args[pn];
      c.types[pn] = pt;
      if (pt.is_node()) c.chain_depth[ex.res.sigma[pn]] = 1;
    }
    if (pre.size() > 1)
      c.provenance = "pre[" + std::to_string(i) + "]";
    if (ex.feasible(c)) roots.push_back(std::move(c));
  }
  ex.push(std::move(roots));
  ex.run();
  return std::move(ex.res);
}

}  // namespace sepgen::sym
