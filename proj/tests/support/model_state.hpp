#pragma once

// Turns a solver verdict into the concrete state it denotes: the cells of
// the predicate-free base heap, materialized under the model, plus stack
// values for the requested variables.  Used to re-validate Sat answers
// against the exact-footprint satisfaction check.

#include <map>
#include <string>
#include <vector>

#include "sepgen/il/ast.hpp"
#include "sepgen/sl/formula.hpp"

namespace sepgen::oracle {

il::ConcreteState state_of_model(const sl::SymHeap& base,
                                 const std::map<std::string, il::Value>& model,
                                 const std::vector<std::string>& stack_vars);

}  // namespace sepgen::oracle
