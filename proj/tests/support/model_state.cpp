#include "model_state.hpp"

#include <stdexcept>

namespace sepgen::oracle {

namespace {

il::Value term_value(const sl::Term& t, const std::map<std::string, il::Value>& model) {
  if (t.is_null()) return il::Value::null();
  auto it = model.find(t.var);
  if (it == model.end())
    throw std::logic_error("model has no value for '" + t.var + "'");
  return it->second;
}

int64_t num_of(const il::Value& v, const std::string& who) {
  if (v.is_int()) return v.as_int();
  if (v.is_bool()) return v.as_bool() ? 1 : 0;
  throw std::logic_error("model value for '" + who + "' is not numeric");
}

il::Value lin_value(const sl::LinExpr& e, const std::map<std::string, il::Value>& model) {
  int64_t acc = e.k;
  for (const auto& [v, c] : e.coeff) {
    auto it = model.find(v);
    if (it == model.end())
      throw std::logic_error("model has no value for '" + v + "'");
    acc += c * num_of(it->second, v);
  }
  return il::Value::integer(acc);
}

}  // namespace

il::ConcreteState state_of_model(const sl::SymHeap& base,
                                 const std::map<std::string, il::Value>& model,
                                 const std::vector<std::string>& stack_vars) {
  il::ConcreteState st;
  for (const auto& v : stack_vars) {
    auto it = model.find(v);
    if (it == model.end())
      throw std::logic_error("model has no value for stack variable '" + v + "'");
    st.stack[v] = it->second;
  }
  for (const auto& atom : base.spatial) {
    const auto* pt = std::get_if<sl::PointsTo>(&atom);
    if (!pt) throw std::logic_error("base heap still contains a predicate");
    il::Value root = term_value(pt->root, model);
    if (!root.is_loc())
      throw std::logic_error("cell root '" + pt->root.str() + "' is not a location");
    il::Record rec;
    rec.node_type = pt->node_type;
    for (const auto& f : pt->fields) {
      if (const auto* t = std::get_if<sl::Term>(&f))
        rec.fields.push_back(term_value(*t, model));
      else
        rec.fields.push_back(lin_value(std::get<sl::LinExpr>(f), model));
    }
    if (!st.heap.emplace(root.as_loc(), std::move(rec)).second)
      throw std::logic_error("two cells share location " + root.str());
  }
  return st;
}

}  // namespace sepgen::oracle
