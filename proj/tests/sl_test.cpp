#include "doctest.h"
#include "sepgen/sl/formula.hpp"

using namespace sepgen;

namespace {

sl::SpecFile parse(const char* text) { return sl::parse_spec(text); }

const char* kLists = R"(
pred sll(x) == emp & x = null \/ ex v,n. x->node{v,n} * sll(n);
pred eqlen(a,b) ==
     emp & a = null & b = null
  \/ ex n1,n2. a->node{_,n1} * b->node{_,n2} * eqlen(n1,n2);
precond p == eqlen(x,y) & x != null;
)";

}  // namespace

TEST_CASE("specification files parse into predicates and preconditions") {
  sl::SpecFile s = parse(kLists);
  REQUIRE(s.env.find("sll") != nullptr);
  REQUIRE(s.env.find("eqlen") != nullptr);
  const sl::PredicateDef& eq = *s.env.find("eqlen");
  CHECK(eq.formals.size() == 2);
  REQUIRE(eq.body.size() == 2);
  CHECK(eq.body[0].spatial.empty());
  CHECK(eq.body[0].alias.size() == 2);
  CHECK(eq.body[1].spatial.size() == 3);
  CHECK(eq.body[1].bound.size() == 4);  // n1, n2 and the two payload holes

  REQUIRE(s.preconds.count("p") == 1);
  const sl::Formula& pre = s.preconds.at("p");
  REQUIRE(pre.size() == 1);
  CHECK(pre[0].alias.size() == 1);
  CHECK_FALSE(pre[0].alias[0].positive);
}

TEST_CASE("formula printing is stable under re-parsing") {
  sl::SpecFile s = parse(kLists);
  const sl::SymHeap& h = s.env.find("eqlen")->body[1];
  std::string once = h.str();
  // Feed the printed text back through a spec wrapper.
  std::string wrapper = "pred q(a,b) == " + once + ";\nprecond r == q(x,y);";
  sl::SpecFile s2 = sl::parse_spec(wrapper + kLists);
  CHECK(s2.env.find("q")->body[0].str() == once);
}

TEST_CASE("substitution renames free occurrences and avoids capture") {
  sl::SpecFile s = parse(kLists);
  sl::SymHeap h = s.env.find("sll")->body[1];  // ex v,n. x->node{v,n} * sll(n)
  sl::SymHeap g = sl::substitute(h, "x", sl::Arg(sl::Term::mk_var("n")));
  // The bound n must have been renamed apart from the new free n.
  const auto* p = std::get_if<sl::PointsTo>(&g.spatial[0]);
  REQUIRE(p != nullptr);
  CHECK(p->root.var == "n");
  bool bound_n_renamed = true;
  for (const auto& b : g.bound) bound_n_renamed &= b.name != "n";
  CHECK(bound_n_renamed);

  // Integer replacement into a reference position is a sort error.
  CHECK_THROWS_AS(sl::substitute(h, "x", sl::Arg(sl::LinExpr::constant(3))),
                  std::exception);
}

TEST_CASE("fresh names bump numeric suffixes deterministically") {
  std::set<std::string> used{"n", "n1", "n2", "X"};
  CHECK(sl::fresh_name("n1", used) == "n3");
  CHECK(sl::fresh_name("X", used) == "X1");
  CHECK(sl::fresh_name("fresh", used) == "fresh");
}

TEST_CASE("unfolding substitutes actuals and freshens bound variables") {
  sl::SpecFile s = parse(kLists);
  sl::SymHeap h;
  sl::PredApp app;
  app.name = "sll";
  app.args = {sl::Term::mk_var("X")};
  h.spatial.push_back(app);
  uint64_t next = sl::assign_occ_ids(h, 1);
  CHECK(next == 2);

  std::vector<sl::SymHeap> out = sl::unfold(h, 1, s.env, &next);
  REQUIRE(out.size() == 2);
  // Base case: emp & X = null.
  CHECK(out[0].spatial.empty());
  REQUIRE(out[0].alias.size() == 1);
  CHECK(out[0].alias[0].lhs.var == "X");
  CHECK(out[0].alias[0].rhs.is_null());
  // Recursive case allocates X and re-applies the predicate to the tail.
  REQUIRE(out[1].spatial.size() == 2);
  const auto* pt = std::get_if<sl::PointsTo>(&out[1].spatial[0]);
  REQUIRE(pt != nullptr);
  CHECK(pt->root.var == "X");
  const auto* tail = std::get_if<sl::PredApp>(&out[1].spatial[1]);
  REQUIRE(tail != nullptr);
  CHECK(tail->occ_id == 2);  // drawn from next_occ

  // Two formulas sharing the occurrence unfold to identical names when the
  // avoid set covers both.
  std::set<std::string> avoid{"X", "spare"};
  uint64_t n1 = 5, n2 = 5;
  std::vector<sl::SymHeap> a = sl::unfold(h, 1, s.env, &n1, &avoid);
  std::vector<sl::SymHeap> b = sl::unfold(h, 1, s.env, &n2, &avoid);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].str() == b[i].str());
}

TEST_CASE("well-foundedness separates grounded from ungrounded predicates") {
  sl::SpecFile s = parse(R"(
pred ok(x) == emp & x = null \/ ex n. x->node{n} * ok(n);
pred down(x,k) == emp & k = 0 \/ ex m. down(x, k-1) * x->node{m} & k >= 1;
pred spin(x) == spin(x) \/ emp & x = null;
precond q == ok(x);
)");
  sl::classify_well_founded(s.env);
  CHECK(s.env.find("ok")->well_founded);
  CHECK(s.env.find("down")->well_founded);
  CHECK_FALSE(s.env.find("spin")->well_founded);
}

TEST_CASE("malformed specifications are rejected") {
  // Unbound variable in a predicate body.
  CHECK_THROWS_AS(parse("pred bad(x) == x->node{y};\nprecond p == bad(a);"),
                  il::ParseError);
  // Arity mismatch at the application site.
  CHECK_THROWS_AS(parse("pred one(x) == emp & x = null;\nprecond p == one(a,b);"),
                  il::ParseError);
  // Unknown predicate in a precondition.
  CHECK_THROWS_AS(parse("precond p == nosuch(a);"), il::ParseError);
}

TEST_CASE("free variables exclude bound ones; star renames apart") {
  sl::SpecFile s = parse(kLists);
  const sl::SymHeap& body = s.env.find("sll")->body[1];
  std::set<std::string> fv = sl::free_vars(body);
  CHECK(fv == std::set<std::string>{"x"});

  sl::SymHeap both = sl::star(body, body);
  CHECK(both.spatial.size() == 4);
  CHECK(both.bound.size() == 4);
  std::set<std::string> names;
  for (const auto& b : both.bound) names.insert(b.name);
  CHECK(names.size() == 4);  // no clash between the two copies
}
