#include <random>

#include "doctest.h"
#include "sepgen/sl/sat.hpp"
#include "sepgen/solver/arith.hpp"
#include "sepgen/solver/base.hpp"
#include "sepgen/solver/solver.hpp"
#include "support/formula_corpus.hpp"
#include "support/model_state.hpp"

using namespace sepgen;

namespace {

sl::LinExpr lin(std::initializer_list<std::pair<const char*, int64_t>> terms, int64_t k) {
  sl::LinExpr e = sl::LinExpr::constant(k);
  for (const auto& [v, c] : terms) e.add(sl::LinExpr::variable(v), c);
  return e;
}

sl::SymHeap pred_app(const std::string& name, std::vector<sl::Arg> args) {
  sl::SymHeap h;
  sl::PredApp a;
  a.name = name;
  a.args = std::move(args);
  h.spatial.push_back(std::move(a));
  return h;
}

sl::SymHeap cell(const char* root, const char* ty, std::vector<sl::Arg> fields) {
  sl::SymHeap h;
  sl::PointsTo pt;
  pt.root = sl::Term::mk_var(root);
  pt.node_type = ty;
  pt.fields = std::move(fields);
  h.spatial.push_back(std::move(pt));
  return h;
}

}  // namespace

TEST_CASE("unit-coefficient equalities are eliminated exactly") {
  // val1 = V + 1 conjoined with val1 <= V is false over the integers, but
  // intervals alone cannot see it: both variables are unbounded.  Solving
  // the equality for val1 and substituting makes the contradiction local.
  solver::AtomConj atoms = {
      {sl::ArithAtom::Op::Eq, lin({{"val1", 1}, {"V", -1}}, -1)},
      {sl::ArithAtom::Op::Le, lin({{"val1", 1}, {"V", -1}}, 0)},
  };
  CHECK(solver::conj_refuted(atoms));
  CHECK(solver::solve_conj(atoms).status == solver::ArithStatus::Unsat);

  // The satisfiable variant: val1 = V + 1 and V <= val1.
  solver::AtomConj sat = {
      {sl::ArithAtom::Op::Eq, lin({{"val1", 1}, {"V", -1}}, -1)},
      {sl::ArithAtom::Op::Le, lin({{"V", 1}, {"val1", -1}}, 0)},
  };
  CHECK_FALSE(solver::conj_refuted(sat));
  auto r = solver::solve_conj(sat);
  REQUIRE(r.status == solver::ArithStatus::Sat);
  CHECK(r.model.at("val1") == r.model.at("V") + 1);
}

TEST_CASE("eliminated variables get consistent model values") {
  solver::AtomConj atoms = {{sl::ArithAtom::Op::Eq, lin({{"i", 1}, {"j", -1}}, -1)}};
  auto r = solver::solve_conj(atoms);
  REQUIRE(r.status == solver::ArithStatus::Sat);
  CHECK(r.model.at("i") == r.model.at("j") + 1);
}

TEST_CASE("non-unit coefficients fall back to intervals and enumeration") {
  solver::AtomConj even = {{sl::ArithAtom::Op::Eq, lin({{"i", 2}}, -4)}};
  auto r = solver::solve_conj(even);
  REQUIRE(r.status == solver::ArithStatus::Sat);
  CHECK(r.model.at("i") == 2);

  solver::AtomConj odd = {{sl::ArithAtom::Op::Eq, lin({{"i", 2}}, -3)}};
  CHECK(solver::solve_conj(odd).status == solver::ArithStatus::Unsat);
}

TEST_CASE("satisfiability of predicate applications") {
  const sl::PredEnv& env = oracle::corpus_env();

  auto just_sll = pred_app("sll", {sl::Arg(sl::Term::mk_var("x"))});
  auto cr = solver::check_sat(just_sll, env);
  REQUIRE(cr.status == solver::SatResult::Sat);
  CHECK(cr.base.spatial.empty());  // smallest witness: the empty list
  CHECK(cr.model.at("x").is_null());

  auto nonempty = just_sll;
  sl::conjoin(nonempty, sl::PureLit{false, sl::Term::mk_var("x"), sl::Term::null()});
  cr = solver::check_sat(nonempty, env);
  REQUIRE(cr.status == solver::SatResult::Sat);
  REQUIRE(cr.base.spatial.size() == 1);
  CHECK(cr.model.at("x") == il::Value::loc(il::Loc{1}));  // cells numbered from 1

  auto contradictory = just_sll;
  sl::conjoin(contradictory, sl::PureLit{true, sl::Term::mk_var("x"), sl::Term::null()});
  sl::conjoin(contradictory, sl::PureLit{false, sl::Term::mk_var("x"), sl::Term::null()});
  CHECK(solver::check_sat(contradictory, env).status == solver::SatResult::Unsat);
}

TEST_CASE("separation refutes overlapping cells") {
  const sl::PredEnv& env = oracle::corpus_env();
  auto two = cell("x", "node", {sl::Arg(sl::LinExpr::constant(0)), sl::Arg(sl::Term::null())});
  auto more = cell("y", "node", {sl::Arg(sl::LinExpr::constant(0)), sl::Arg(sl::Term::null())});
  two.spatial.push_back(more.spatial[0]);
  CHECK(solver::check_sat(two, env).status == solver::SatResult::Sat);

  sl::SymHeap aliased = two;
  sl::conjoin(aliased, sl::PureLit{true, sl::Term::mk_var("x"), sl::Term::mk_var("y")});
  CHECK(solver::check_sat(aliased, env).status == solver::SatResult::Unsat);
  CHECK(solver::pure_refuted(aliased));
}

TEST_CASE("disjunction reports the satisfied disjunct") {
  const sl::PredEnv& env = oracle::corpus_env();
  sl::SymHeap bad;
  sl::conjoin(bad, sl::PureLit{true, sl::Term::mk_var("x"), sl::Term::null()});
  sl::conjoin(bad, sl::PureLit{false, sl::Term::mk_var("x"), sl::Term::null()});
  sl::Formula f = {bad, pred_app("sll", {sl::Arg(sl::Term::mk_var("x"))})};
  auto cr = solver::check_sat(f, env);
  REQUIRE(cr.status == solver::SatResult::Sat);
  CHECK(cr.disjunct == 1);
}

TEST_CASE("models convert to states that satisfy the formula") {
  const sl::PredEnv& env = oracle::corpus_env();
  auto h = pred_app("eqlen", {sl::Arg(sl::Term::mk_var("x")), sl::Arg(sl::Term::mk_var("y"))});
  sl::conjoin(h, sl::PureLit{false, sl::Term::mk_var("x"), sl::Term::null()});
  auto cr = solver::check_sat(h, env);
  REQUIRE(cr.status == solver::SatResult::Sat);
  CHECK(cr.base.spatial.size() == 2);  // one cell per list
  il::ConcreteState st = oracle::state_of_model(cr.base, cr.model, {"x", "y"});
  CHECK(sl::satisfies(st, h, env) == sl::Sat3::Yes);
}

TEST_CASE("derived base facts keep explicit null cases") {
  const sl::PredEnv& env = oracle::corpus_env();
  sl::Formula base = solver::base_formulas("sll", env);
  REQUIRE_FALSE(base.empty());
  bool has_null = false;
  for (const auto& d : base)
    for (const auto& lit : d.alias)
      if (lit.positive && lit.rhs.is_null()) has_null = true;
  CHECK(has_null);

  // sll's null/alias behavior is already explicit, so nothing is added.
  sl::PredEnv aug = solver::augment_env(env);
  CHECK(aug.find("sll")->body.size() == env.find("sll")->body.size());
}

TEST_CASE("power-of-two segments produce exact payload-zero chains") {
  const sl::PredEnv& env = oracle::corpus_env();
  auto h = pred_app("pow2seg", {sl::Arg(sl::Term::mk_var("x")), sl::Arg(sl::Term::null()),
                                sl::Arg(sl::LinExpr::constant(2))});
  auto cr = solver::check_sat(h, env);
  REQUIRE(cr.status == solver::SatResult::Sat);
  CHECK(cr.base.spatial.size() == 4);
  il::ConcreteState st = oracle::state_of_model(cr.base, cr.model, {"x"});
  REQUIRE(st.heap.size() == 4);
  for (const auto& [loc, rec] : st.heap) {
    (void)loc;
    CHECK(rec.fields.at(0) == il::Value::integer(0));
  }
  CHECK(sl::satisfies(st, h, env) == sl::Sat3::Yes);
}

TEST_CASE("solver agrees with bounded enumeration on random formulas") {
  std::mt19937_64 rng(20260814ull);
  oracle::AgreeOptions ao;
  ao.solver.unfold_depth = 3;
  ao.solver.int_lo = -3;
  ao.solver.int_hi = 3;

  const int kCount = 150;  // quick-signal slice; the full corpus runs elsewhere
  int sat = 0, unsat = 0, unknown = 0;
  for (int k = 0; k < kCount; ++k) {
    oracle::CorpusFormula f = oracle::random_formula(rng);
    std::string diag;
    oracle::AgreeOutcome r = oracle::check_agreement(f, ao, &diag);
    INFO("formula ", k, ": ", f.heap.str(), " — ", diag);
    CHECK(r != oracle::AgreeOutcome::SatModelBad);
    CHECK(r != oracle::AgreeOutcome::UnsatRefuted);
    if (r == oracle::AgreeOutcome::SatValidated) ++sat;
    if (r == oracle::AgreeOutcome::UnsatConfirmed) ++unsat;
    if (r == oracle::AgreeOutcome::Unknown) ++unknown;
  }
  CHECK(sat > 0);
  CHECK(unsat > 0);
  CHECK(unknown * 20 < kCount);  // well under 5%
  MESSAGE("corpus slice: ", sat, " sat / ", unsat, " unsat / ", unknown, " unknown");
}
