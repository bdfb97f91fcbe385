#include "doctest.h"
#include "sepgen/il/ast.hpp"
#include "sepgen/il/interp.hpp"

using namespace sepgen;

namespace {

il::Trace run_text(const char* text, il::ConcreteState init = {},
                   uint64_t fuel = 10000) {
  il::Program p = il::parse_program(text);
  return il::run(p, init, fuel, {});
}

}  // namespace

TEST_CASE("integer literals keep their own value, not the next token's") {
  // Regression: the parser once read a literal's value after advancing the
  // lexer, picking up the following token.
  il::Program p = il::parse_program(R"(
params int a;
0: x := 0
1: y := 42
2: z := x + 7
)");
  REQUIRE(p.stmts.size() == 3);
  CHECK(p.stmts[0].expr->int_val == 0);
  CHECK(p.stmts[1].expr->int_val == 42);
  CHECK(p.stmts[2].expr->rhs->int_val == 7);
}

TEST_CASE("program text round-trips through the printer") {
  const char* text = R"(
data node { int val; node next; }
params node x, int v;
0: r := -1
1: if x != null && v > 0 then goto 2 else goto 6
2: u := x.val
3: x.val := u + 1
4: y := new node(u, x)
5: free y
)";
  il::Program p1 = il::parse_program(text);
  il::Program p2 = il::parse_program(p1.str());
  CHECK(p1.str() == p2.str());
  CHECK(p2.stmts[0].expr->kind == il::Expr::Kind::Unop);
  CHECK(p2.stmts[1].then_target->int_val == 2);
  CHECK(p2.stmts[1].else_target->int_val == 6);
}

TEST_CASE("parse errors carry position and reason") {
  CHECK_THROWS_AS(il::parse_program("params node x;\n0: x := new node(3)"),
                  il::ParseError);  // literal arguments are not allowed
  CHECK_THROWS_AS(il::parse_program("params int a;\n1: x := 1"),
                  il::ParseError);  // statements must start at 0
  CHECK_THROWS_AS(il::parse_program("params int a;\n0: x := y"),
                  il::ParseError);  // y is never declared anywhere
  CHECK_THROWS_AS(il::parse_program("params int a;\n0: goto 5"),
                  il::ParseError);  // constant target out of range
}

TEST_CASE("arithmetic, comparisons, and short-circuiting evaluate correctly") {
  il::Trace t = run_text(R"(
params int a;
0: b := a * 3
1: c := b - 1
2: d := c <= 5
3: e := d && a > 0
4: assert e
)",
                         {{}, {{"a", il::Value::integer(2)}}});
  CHECK(t.halt.kind == il::HaltKind::Exit);
  CHECK(t.final_state.stack.at("b") == il::Value::integer(6));
  CHECK(t.final_state.stack.at("e") == il::Value::boolean(true));

  // Short-circuit: the right operand would fault if evaluated.
  il::Trace u = run_text(R"(
data node { int val; node next; }
params node x;
0: ok := x != null && x.val = 1
1: if ok then goto 2 else goto 3
2: r := 1
)",
                         {{}, {{"x", il::Value::null()}}});
  CHECK(u.halt.kind == il::HaltKind::Exit);
  CHECK(u.branches.size() == 1);
  CHECK_FALSE(u.branches[0].taken);
}

TEST_CASE("heap statements allocate, store, load, and free") {
  il::Trace t = run_text(R"(
data node { int val; node next; }
params int a;
0: n := null
1: x := new node(a, n)
2: x.val := 9
3: v := x.val
4: assert v = 9
5: free x
)",
                         {{}, {{"a", il::Value::integer(1)}}});
  CHECK(t.halt.kind == il::HaltKind::Exit);
  CHECK(t.final_state.heap.empty());
}

TEST_CASE("fresh locations never collide with input locations") {
  il::ConcreteState init;
  init.stack["x"] = il::Value::loc(il::Loc{7});
  init.heap[il::Loc{7}] = il::Record{"node", {il::Value::integer(0), il::Value::null()}};
  il::Trace t = run_text(R"(
data node { int val; node next; }
params node x;
0: c := 0
1: y := new node(c, x)
)",
                         init);
  CHECK(t.halt.kind == il::HaltKind::Exit);
  il::Value y = t.final_state.stack.at("y");
  REQUIRE(y.is_loc());
  CHECK(y.as_loc().id > 7);
}

TEST_CASE("faults are reported with the offending operation") {
  auto reason = [](const char* text, il::ConcreteState init = {}) {
    il::Trace t = run_text(text, std::move(init));
    REQUIRE(t.halt.kind == il::HaltKind::Fault);
    return t.halt.reason;
  };

  CHECK(reason("data node { int val; node next; }\nparams node x;\n0: v := x.val",
               {{}, {{"x", il::Value::null()}}}) == "null dereference at 'x.val'");
  CHECK(reason("params int a;\n0: v := a.f", {{}, {{"a", il::Value::integer(1)}}}) ==
        "dereference of non-reference 'a'");
  // Declaredness is flow-insensitive, so a variable assigned on the branch
  // not taken reads as unbound at run time.
  CHECK(reason("params int a;\n0: if a = 1 then goto 1 else goto 2\n1: b := 5\n2: v := b + 1",
               {{}, {{"a", il::Value::integer(0)}}}) ==
        "read of unbound variable 'b'");
  CHECK(reason("params int a;\n0: v := a + null", {{}, {{"a", il::Value::integer(0)}}}) ==
        "type mismatch in '+'");
  CHECK(reason("params int a;\n0: assert a", {{}, {{"a", il::Value::integer(0)}}}) ==
        "assert on non-boolean");
  CHECK(reason("params int a;\n0: if a then goto 0 else goto 0",
               {{}, {{"a", il::Value::integer(0)}}}) == "conditional on non-boolean");
  CHECK(reason("params node x;\n0: free x", {{}, {{"x", il::Value::null()}}}) ==
        "free of null");

  // Freeing twice through an alias leaves a dangling reference behind.
  il::ConcreteState init;
  init.stack["x"] = il::Value::loc(il::Loc{1});
  init.heap[il::Loc{1}] = il::Record{"node", {il::Value::integer(0), il::Value::null()}};
  CHECK(reason("data node { int val; node next; }\nparams node x;\n0: y := x\n1: free x\n2: free y",
               init) == "double free");
  il::ConcreteState init2 = init;
  CHECK(reason("data node { int val; node next; }\nparams node x;\n0: y := x\n1: free x\n2: v := y.val",
               init2) == "dangling reference at 'y.val'");
}

TEST_CASE("assertion failures and fuel exhaustion are distinct halts") {
  il::Trace t = run_text("params int a;\n0: assert a = 1",
                         {{}, {{"a", il::Value::integer(0)}}});
  CHECK(t.halt.kind == il::HaltKind::Assertion);
  CHECK(t.halt.reason == "assertion failed");

  il::Trace u = run_text("params int a;\n0: goto 0", {{}, {{"a", il::Value::integer(0)}}}, 50);
  CHECK(u.halt.kind == il::HaltKind::Timeout);
}

TEST_CASE("branch events record every conditional in execution order") {
  il::Trace t = run_text(R"(
params int a;
0: i := 0
1: if i < a then goto 2 else goto 4
2: i := i + 1
3: goto 1
)",
                         {{}, {{"a", il::Value::integer(2)}}});
  REQUIRE(t.branches.size() == 3);
  CHECK(t.branches[0] == il::BranchEvent{1, true});
  CHECK(t.branches[1] == il::BranchEvent{1, true});
  CHECK(t.branches[2] == il::BranchEvent{1, false});
  CHECK(t.pcs.front() == 0);
}

TEST_CASE("integer overflow faults under the default policy") {
  il::Trace t = run_text(R"(
params int a;
0: b := a * a
1: c := b * b
2: d := c * c
3: e := d * d
)",
                         {{}, {{"a", il::Value::integer(1000000)}}});
  CHECK(t.halt.kind == il::HaltKind::Fault);
  CHECK(t.halt.reason.find("integer overflow") == 0);
}
