#include "sepgen/gen/testgen.hpp"

#include <algorithm>
#include <stdexcept>

namespace sepgen::gen {

namespace il = sepgen::il;
namespace sl = sepgen::sl;

sl::SymHeap input_constraint(const sym::PathOutcome& o) {
  sl::SymHeap g;
  g.bound = o.input.bound;
  for (const auto& b : o.delta.bound) {
    bool seen = false;
    for (const auto& have : g.bound)
      if (have.name == b.name) {
        seen = true;
        break;
      }
    if (!seen) g.bound.push_back(b);
  }
  g.spatial = o.input.spatial;
  // The path condition's pure part constrains the input symbols (directly
  // and through the symbols execution introduced), so take all of it.
  g.alias = o.delta.alias;
  g.arith = o.delta.arith;
  return g;
}

namespace {

il::Value term_value(const sl::Term& t,
                     const std::map<std::string, il::Value>& model) {
  if (t.is_null()) return il::Value::null();
  auto it = model.find(t.var);
  return it == model.end() ? il::Value::null() : it->second;
}

int64_t lin_value(const sl::LinExpr& e,
                  const std::map<std::string, il::Value>& model) {
  int64_t v = e.k;
  for (const auto& [var, c] : e.coeff) {
    auto it = model.find(var);
    if (it != model.end() && it->second.is_int()) v += c * it->second.as_int();
    // absent or non-integer: a don't-care, reads as 0
  }
  return v;
}

}  // namespace

std::optional<TestInput> build_input(
    const sym::PathOutcome& o, const std::map<std::string, std::string>& sigma,
    const il::Program& prog, const sl::PredEnv& env,
    const solver::SolverOptions& opts, std::string* why) {
  auto fail = [&](std::string reason) -> std::optional<TestInput> {
    if (why) *why = std::move(reason);
    return std::nullopt;
  };

  sl::SymHeap combined = input_constraint(o);
  solver::CheckResult cr = solver::check_sat(combined, env, opts);
  if (cr.status == solver::SatResult::Unsat) return fail(kNoModel);
  if (cr.status == solver::SatResult::Unknown) return fail(kUndecided);

  // Materialize every cell of the solved footprint at its model location.
  std::map<il::Loc, il::Record> cells;
  for (const auto& sa : cr.base.spatial) {
    const auto* p = std::get_if<sl::PointsTo>(&sa);
    if (!p) return fail("internal: predicate left in a solved base");
    il::Value root = term_value(p->root, cr.model);
    if (!root.is_loc())
      return fail("internal: cell root not pinned to a location");
    const il::DataDecl* d = prog.find_decl(p->node_type);
    il::Record rec;
    rec.node_type = p->node_type;
    for (size_t i = 0; i < p->fields.size(); ++i) {
      if (const auto* t = std::get_if<sl::Term>(&p->fields[i])) {
        rec.fields.push_back(term_value(*t, cr.model));
      } else {
        int64_t v = lin_value(std::get<sl::LinExpr>(p->fields[i]), cr.model);
        bool is_bool = d && i < d->fields.size() &&
                       d->fields[i].second.kind == il::Type::Kind::Bool;
        rec.fields.push_back(is_bool ? il::Value::boolean(v != 0)
                                     : il::Value::integer(v));
      }
    }
    if (!cells.emplace(root.as_loc(), std::move(rec)).second)
      return fail("internal: two cells share a location");
  }

  // Parameter values; symbols the model never mentions are don't-cares.
  il::ConcreteState st;
  for (const auto& [pn, pt] : prog.params) {
    il::Value v = pt.is_node() ? il::Value::null()
                  : pt.kind == il::Type::Kind::Bool ? il::Value::boolean(false)
                                                    : il::Value::integer(0);
    auto sit = sigma.find(pn);
    if (sit != sigma.end()) {
      auto mit = cr.model.find(sit->second);
      if (mit != cr.model.end()) v = mit->second;
    }
    if (pt.kind == il::Type::Kind::Bool && v.is_int())
      v = il::Value::boolean(v.as_int() != 0);
    st.stack[pn] = v;
  }

  // Keep the reachable closure, renumbering locations breadth-first from
  // the parameters so equal inputs serialize identically.
  std::map<il::Loc, il::Loc> renum;
  std::vector<il::Loc> order;
  auto visit = [&](const il::Value& v) {
    if (!v.is_loc()) return;
    il::Loc l = v.as_loc();
    if (!cells.count(l) || renum.count(l)) return;
    il::Loc fresh{static_cast<uint32_t>(renum.size() + 1)};
    renum[l] = fresh;
    order.push_back(l);
  };
  for (const auto& [pn, pt] : prog.params) {
    (void)pt;
    visit(st.stack[pn]);
  }
  for (size_t i = 0; i < order.size(); ++i)
    for (const auto& f : cells[order[i]].fields) visit(f);

  // References that never acquired a cell keep distinct locations after the
  // real ones; touching them would have forced a cell during exploration.
  std::map<il::Loc, il::Loc> loose;
  auto remap = [&](const il::Value& v) -> il::Value {
    if (!v.is_loc()) return v;
    il::Loc l = v.as_loc();
    auto it = renum.find(l);
    if (it != renum.end()) return il::Value::loc(it->second);
    auto [lit, fresh] = loose.emplace(
        l, il::Loc{static_cast<uint32_t>(renum.size() + loose.size() + 1)});
    (void)fresh;
    return il::Value::loc(lit->second);
  };

  TestInput t;
  for (const auto& [pn, v] : st.stack) t.state.stack[pn] = remap(v);
  for (const auto& l : order) {
    il::Record rec = cells[l];
    for (auto& f : rec.fields) f = remap(f);
    t.state.heap[renum[l]] = std::move(rec);
  }
  return t;
}

sl::Sat3 validate(const TestInput& t, const sl::Formula& pre,
                  const sl::PredEnv& env, const sl::SatOptions& opts) {
  return sl::satisfies(t.state, pre, env, opts);
}

ReplayResult replay(const il::Program& prog, const TestInput& t,
                    const sym::PathOutcome& o, uint64_t fuel) {
  ReplayResult r;
  r.trace = il::run(prog, t.state, fuel, {});
  r.exited = r.trace.halt.kind == il::HaltKind::Exit;
  r.trace_match = r.trace.branches == o.branches;
  return r;
}

CoverageReport measure_coverage(const il::Program& prog,
                                const std::vector<il::Trace>& traces) {
  CoverageReport rep;
  std::map<std::pair<int, bool>, size_t> index;
  for (const auto& s : prog.stmts) {
    if (s.kind != il::Statement::Kind::Cond) continue;
    for (bool dir : {true, false}) {
      index[{s.index, dir}] = rep.sides.size();
      rep.sides.push_back({s.index, dir, 0});
    }
  }
  for (const auto& tr : traces)
    for (const auto& b : tr.branches) {
      auto it = index.find({b.stmt, b.taken});
      if (it != index.end()) ++rep.sides[it->second].hits;
    }
  rep.total = static_cast<int>(rep.sides.size());
  for (const auto& s : rep.sides)
    if (s.hits > 0) ++rep.covered;
  return rep;
}

// --- JSON ------------------------------------------------------------------

namespace {

using nlohmann::ordered_json;

std::string loc_name(il::Loc l) { return "L" + std::to_string(l.id); }

ordered_json value_json(const il::Value& v) {
  if (v.is_null()) return nullptr;
  if (v.is_int()) return v.as_int();
  if (v.is_bool()) return v.as_bool();
  return ordered_json{{"ref", loc_name(v.as_loc())}};
}

il::Value value_from_json(const ordered_json& j) {
  if (j.is_null()) return il::Value::null();
  if (j.is_boolean()) return il::Value::boolean(j.get<bool>());
  if (j.is_number_integer()) return il::Value::integer(j.get<int64_t>());
  if (j.is_object() && j.contains("ref")) {
    std::string r = j.at("ref").get<std::string>();
    if (r.size() < 2 || r[0] != 'L')
      throw std::invalid_argument("bad reference '" + r + "'");
    return il::Value::loc(il::Loc{static_cast<uint32_t>(
        std::stoul(r.substr(1)))});
  }
  throw std::invalid_argument("unrecognized value " + j.dump());
}

}  // namespace

nlohmann::ordered_json test_json(const TestInput& t, const il::Program& prog) {
  ordered_json j;
  j["stack"] = ordered_json::object();
  for (const auto& [pn, pt] : prog.params) {
    (void)pt;
    auto it = t.state.stack.find(pn);
    j["stack"][pn] =
        it == t.state.stack.end() ? ordered_json(nullptr) : value_json(it->second);
  }
  j["heap"] = ordered_json::array();
  for (const auto& [l, rec] : t.state.heap) {
    ordered_json c;
    c["loc"] = loc_name(l);
    c["type"] = rec.node_type;
    c["fields"] = ordered_json::object();
    const il::DataDecl* d = prog.find_decl(rec.node_type);
    for (size_t i = 0; i < rec.fields.size(); ++i) {
      std::string fname = d && i < d->fields.size()
                              ? d->fields[i].first
                              : "f" + std::to_string(i);
      c["fields"][fname] = value_json(rec.fields[i]);
    }
    j["heap"].push_back(std::move(c));
  }
  return j;
}

TestInput test_from_json(const nlohmann::ordered_json& j,
                         const il::Program& prog) {
  TestInput t;
  for (const auto& [k, v] : j.at("stack").items())
    t.state.stack[k] = value_from_json(v);
  for (const auto& c : j.at("heap")) {
    std::string ln = c.at("loc").get<std::string>();
    il::Loc l{static_cast<uint32_t>(std::stoul(ln.substr(1)))};
    il::Record rec;
    rec.node_type = c.at("type").get<std::string>();
    const il::DataDecl* d = prog.find_decl(rec.node_type);
    if (!d)
      throw std::invalid_argument("unknown record '" + rec.node_type + "'");
    rec.fields.resize(d->fields.size(), il::Value::null());
    for (const auto& [fn, fv] : c.at("fields").items()) {
      int idx = d->field_index(fn);
      if (idx < 0)
        throw std::invalid_argument("record '" + rec.node_type +
                                    "' has no field '" + fn + "'");
      rec.fields[static_cast<size_t>(idx)] = value_from_json(fv);
    }
    t.state.heap[l] = std::move(rec);
  }
  return t;
}

nlohmann::ordered_json coverage_json(const CoverageReport& r) {
  ordered_json j;
  j["branches"] = ordered_json::array();
  for (const auto& s : r.sides)
    j["branches"].push_back(ordered_json{
        {"stmt", s.stmt}, {"dir", s.dir ? "T" : "F"}, {"hits", s.hits}});
  j["covered"] = r.covered;
  j["total"] = r.total;
  return j;
}

}  // namespace sepgen::gen
