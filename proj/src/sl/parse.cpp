#include <cctype>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "sepgen/sl/formula.hpp"

// Spec files declare inductive predicates and named preconditions:
//
//   pred sll(x) ==
//        emp & x = null
//     \/ ex v, n. x->node{v, n} * sll(n);
//
//   precond list_input == sll(h);
//
// Parsing happens in three passes: a raw syntax pass, a whole-file sort
// inference fixpoint (variables are reference- or integer-sorted depending on
// where they occur), and elaboration into the SymHeap normal form.  `_` is a
// wildcard that becomes a fresh existential.

namespace sepgen::sl {

namespace {

using il::ParseError;

[[noreturn]] void fail(const std::string& msg, int line, int col) {
  throw ParseError(line, col, msg);
}

// ---------------------------------------------------------------------------
// Tokens

struct Token {
  enum class Kind { Ident, Int, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  int64_t value = 0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return pushed_ ? *pushed_ : tok_; }
  Token take() {
    if (pushed_) {
      Token t = *pushed_;
      pushed_.reset();
      return t;
    }
    Token t = tok_;
    advance();
    return t;
  }
  void push_back(Token t) { pushed_ = std::move(t); }

 private:
  std::optional<Token> pushed_;
  void advance() {
    skip_ws();
    tok_ = Token{};
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) return;  // End
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        s += get();
      tok_.kind = Token::Kind::Ident;
      tok_.text = std::move(s);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string s;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
        s += get();
      tok_.kind = Token::Kind::Int;
      tok_.text = s;
      try {
        tok_.value = std::stoll(s);
      } catch (const std::out_of_range&) {
        fail("integer literal out of range: " + s, line_, col_);
      }
      return;
    }
    // Multi-character punctuation first.
    static const char* two[] = {"==", "!=", "<=", ">=", "->", "\\/", "&&"};
    if (pos_ + 1 < src_.size()) {
      std::string pair{src_[pos_], src_[pos_ + 1]};
      for (const char* p : two) {
        if (pair == p) {
          get();
          get();
          tok_.kind = Token::Kind::Punct;
          tok_.text = pair == "&&" ? "&" : pair;  // `&&` is accepted as `&`
          return;
        }
      }
    }
    static const std::string singles = "(){},;.=<>*&+-!";
    if (singles.find(c) != std::string::npos) {
      tok_.kind = Token::Kind::Punct;
      tok_.text = std::string(1, get());
      return;
    }
    fail(std::string("unexpected character '") + c + "'", line_, col_);
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') get();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        get();
      } else {
        break;
      }
    }
  }

  char get() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

// ---------------------------------------------------------------------------
// Raw (untyped) trees

struct RawExpr;
using RawExprPtr = std::shared_ptr<RawExpr>;

struct RawExpr {
  enum class Kind { Int, Var, Null, Add, Sub, Mul, Neg };
  Kind kind = Kind::Null;
  int64_t k = 0;
  std::string var;
  RawExprPtr a, b;
  int line = 0, col = 0;
};

struct RawAtom {
  enum class Kind { Emp, True, False, PointsTo, Pred, Cmp };
  Kind kind = Kind::Emp;
  RawExprPtr root;               // PointsTo
  std::string name;              // PointsTo record / Pred name
  std::vector<RawExprPtr> args;  // PointsTo fields / Pred args
  std::string op;                // Cmp operator
  RawExprPtr lhs, rhs;           // Cmp operands
  int line = 0, col = 0;
};

struct RawDisjunct {
  std::vector<std::string> ex_names;
  std::vector<RawAtom> atoms;
  int line = 0, col = 0;
};

struct RawDef {
  std::string name;
  std::vector<std::string> formals;
  std::vector<RawDisjunct> disjuncts;
  int line = 0, col = 0;
};

struct RawPre {
  std::string name;
  std::vector<RawDisjunct> disjuncts;
  int line = 0, col = 0;
};

bool is_reserved(const std::string& s) {
  static const std::set<std::string> words = {"pred", "precond", "ex",   "emp",
                                              "null", "true",    "false"};
  return words.count(s) != 0;
}

// ---------------------------------------------------------------------------
// Raw parser

class SpecParser {
 public:
  explicit SpecParser(const std::string& src) : lx_(src) {}

  void parse() {
    while (lx_.peek().kind != Token::Kind::End) {
      Token t = lx_.peek();
      if (t.kind != Token::Kind::Ident)
        fail("expected 'pred' or 'precond'", t.line, t.col);
      if (t.text == "pred") parse_pred();
      else if (t.text == "precond") parse_precond();
      else fail("expected 'pred' or 'precond', got '" + t.text + "'", t.line, t.col);
    }
  }

  std::vector<RawDef> defs;
  std::vector<RawPre> pres;

 private:
  Token expect_punct(const std::string& p) {
    Token t = lx_.take();
    if (t.kind != Token::Kind::Punct || t.text != p)
      fail("expected '" + p + "'", t.line, t.col);
    return t;
  }

  bool at_punct(const std::string& p) {
    return lx_.peek().kind == Token::Kind::Punct && lx_.peek().text == p;
  }

  std::string expect_name(const char* what) {
    Token t = lx_.take();
    if (t.kind != Token::Kind::Ident || is_reserved(t.text) || t.text == "_")
      fail(std::string("expected ") + what, t.line, t.col);
    return t.text;
  }

  void parse_pred() {
    Token kw = lx_.take();
    RawDef d;
    d.line = kw.line;
    d.col = kw.col;
    d.name = expect_name("predicate name");
    expect_punct("(");
    if (!at_punct(")")) {
      for (;;) {
        std::string f = expect_name("formal parameter");
        for (const auto& g : d.formals)
          if (g == f)
            fail("duplicate formal '" + f + "' in predicate '" + d.name + "'",
                             kw.line, kw.col);
        d.formals.push_back(f);
        if (at_punct(",")) {
          lx_.take();
          continue;
        }
        break;
      }
    }
    expect_punct(")");
    expect_punct("==");
    d.disjuncts = parse_formula();
    expect_punct(";");
    defs.push_back(std::move(d));
  }

  void parse_precond() {
    Token kw = lx_.take();
    RawPre p;
    p.line = kw.line;
    p.col = kw.col;
    p.name = expect_name("precondition name");
    expect_punct("==");
    p.disjuncts = parse_formula();
    expect_punct(";");
    pres.push_back(std::move(p));
  }

  std::vector<RawDisjunct> parse_formula() {
    std::vector<RawDisjunct> out;
    out.push_back(parse_disjunct());
    while (at_punct("\\/")) {
      lx_.take();
      out.push_back(parse_disjunct());
    }
    return out;
  }

  RawDisjunct parse_disjunct() {
    RawDisjunct d;
    d.line = lx_.peek().line;
    d.col = lx_.peek().col;
    if (lx_.peek().kind == Token::Kind::Ident && lx_.peek().text == "ex") {
      lx_.take();
      for (;;) {
        Token t = lx_.peek();
        std::string v = expect_name("quantified variable");
        for (const auto& e : d.ex_names)
          if (e == v) fail("duplicate quantified variable '" + v + "'", t.line, t.col);
        d.ex_names.push_back(v);
        if (at_punct(",")) {
          lx_.take();
          continue;
        }
        break;
      }
      expect_punct(".");
    }
    d.atoms.push_back(parse_atom(d));
    while (at_punct("*") || at_punct("&")) {
      lx_.take();
      d.atoms.push_back(parse_atom(d));
    }
    return d;
  }

  RawAtom parse_atom(RawDisjunct& scope) {
    Token t = lx_.peek();
    RawAtom a;
    a.line = t.line;
    a.col = t.col;
    if (t.kind == Token::Kind::Ident && t.text == "emp") {
      lx_.take();
      a.kind = RawAtom::Kind::Emp;
      return a;
    }
    if (t.kind == Token::Kind::Ident && t.text == "true") {
      lx_.take();
      a.kind = RawAtom::Kind::True;
      return a;
    }
    if (t.kind == Token::Kind::Ident && t.text == "false") {
      lx_.take();
      a.kind = RawAtom::Kind::False;
      return a;
    }
    RawExprPtr e = parse_expr(scope);
    if (at_punct("->")) {
      lx_.take();
      a.kind = RawAtom::Kind::PointsTo;
      a.root = e;
      a.name = expect_name("record name");
      expect_punct("{");
      if (!at_punct("}")) {
        for (;;) {
          a.args.push_back(parse_expr(scope));
          if (at_punct(",")) {
            lx_.take();
            continue;
          }
          break;
        }
      }
      expect_punct("}");
      return a;
    }
    if (at_punct("(") && e->kind == RawExpr::Kind::Var) {
      // predicate application
      lx_.take();
      a.kind = RawAtom::Kind::Pred;
      a.name = e->var;
      if (!at_punct(")")) {
        for (;;) {
          a.args.push_back(parse_expr(scope));
          if (at_punct(",")) {
            lx_.take();
            continue;
          }
          break;
        }
      }
      expect_punct(")");
      return a;
    }
    // comparison atom
    Token op = lx_.take();
    static const std::set<std::string> cmps = {"=", "!=", "<=", "<", ">=", ">"};
    if (op.kind != Token::Kind::Punct || !cmps.count(op.text))
      fail("expected a comparison operator after expression", op.line, op.col);
    a.kind = RawAtom::Kind::Cmp;
    a.op = op.text;
    a.lhs = e;
    a.rhs = parse_expr(scope);
    return a;
  }

  // additive > multiplicative > unary > primary
  RawExprPtr parse_expr(RawDisjunct& scope) {
    RawExprPtr e = parse_mul(scope);
    while (at_punct("+") || at_punct("-")) {
      Token op = lx_.take();
      auto r = std::make_shared<RawExpr>();
      r->kind = op.text == "+" ? RawExpr::Kind::Add : RawExpr::Kind::Sub;
      r->line = op.line;
      r->col = op.col;
      r->a = e;
      r->b = parse_mul(scope);
      e = r;
    }
    return e;
  }

  RawExprPtr parse_mul(RawDisjunct& scope) {
    RawExprPtr e = parse_unary(scope);
    while (at_punct("*")) {
      // `*` doubles as the separating conjunction.  It is multiplication
      // only in the linear shapes `k * e` / `e * k`; otherwise hand the
      // token back to the conjunct loop.
      bool left_int = e->kind == RawExpr::Kind::Int;
      Token star = lx_.take();
      bool right_int = lx_.peek().kind == Token::Kind::Int;
      if (!left_int && !right_int) {
        lx_.push_back(std::move(star));
        break;
      }
      auto r = std::make_shared<RawExpr>();
      r->kind = RawExpr::Kind::Mul;
      r->line = star.line;
      r->col = star.col;
      r->a = e;
      r->b = parse_unary(scope);
      e = r;
    }
    return e;
  }

  RawExprPtr parse_unary(RawDisjunct& scope) {
    if (at_punct("-")) {
      Token op = lx_.take();
      auto r = std::make_shared<RawExpr>();
      r->kind = RawExpr::Kind::Neg;
      r->line = op.line;
      r->col = op.col;
      r->a = parse_unary(scope);
      return r;
    }
    return parse_primary(scope);
  }

  RawExprPtr parse_primary(RawDisjunct& scope) {
    Token t = lx_.take();
    auto r = std::make_shared<RawExpr>();
    r->line = t.line;
    r->col = t.col;
    if (t.kind == Token::Kind::Int) {
      r->kind = RawExpr::Kind::Int;
      r->k = t.value;
      return r;
    }
    if (t.kind == Token::Kind::Punct && t.text == "(") {
      RawExprPtr e = parse_expr(scope);
      expect_punct(")");
      return e;
    }
    if (t.kind == Token::Kind::Ident) {
      if (t.text == "null") {
        r->kind = RawExpr::Kind::Null;
        return r;
      }
      if (t.text == "_") {
        // wildcard: a fresh existential local to this disjunct
        std::string name;
        std::set<std::string> used(scope.ex_names.begin(), scope.ex_names.end());
        name = fresh_name("_1", used);
        scope.ex_names.push_back(name);
        r->kind = RawExpr::Kind::Var;
        r->var = name;
        return r;
      }
      if (is_reserved(t.text))
        fail("reserved word '" + t.text + "' in expression", t.line, t.col);
      r->kind = RawExpr::Kind::Var;
      r->var = t.text;
      return r;
    }
    fail("expected an expression", t.line, t.col);
  }

  Lexer lx_;
};

// ---------------------------------------------------------------------------
// Sort inference
//
// Variables live in scopes: predicate formals (per definition), quantified
// variables (per disjunct), and precondition free variables (file-global,
// these are program parameters).  We run to a fixpoint because sorts flow in
// both directions through predicate applications.

struct SortState {
  // nullopt = not yet known
  std::map<std::string, std::vector<std::optional<Sort>>> formal_sorts;
  std::map<const RawDisjunct*, std::map<std::string, std::optional<Sort>>> locals;
  std::map<std::string, std::optional<Sort>> globals;
  bool changed = false;
};

struct InferCtx {
  const RawDef* def = nullptr;  // null inside a precondition
  const RawDisjunct* disj = nullptr;
  SortState* st = nullptr;
  const std::vector<il::DataDecl>* decls = nullptr;
  const std::map<std::string, const RawDef*>* by_name = nullptr;

  bool is_local(const std::string& v) const {
    for (const auto& e : disj->ex_names)
      if (e == v) return true;
    return false;
  }
  int formal_index(const std::string& v) const {
    if (!def) return -1;
    for (size_t i = 0; i < def->formals.size(); ++i)
      if (def->formals[i] == v) return static_cast<int>(i);
    return -1;
  }

  std::optional<Sort>* slot(const std::string& v, int line, int col) const {
    if (is_local(v)) return &st->locals[disj][v];
    int fi = formal_index(v);
    if (fi >= 0) return &st->formal_sorts[def->name][static_cast<size_t>(fi)];
    if (def)
      fail("variable '" + v + "' in body of '" + def->name +
                           "' is neither a formal nor quantified",
                       line, col);
    return &st->globals[v];
  }

  void note(const std::string& v, const Sort& s, int line, int col) const {
    std::optional<Sort>* sl = slot(v, line, col);
    if (!*sl) {
      *sl = s;
      st->changed = true;
      return;
    }
    Sort& cur = **sl;
    if (cur.kind != s.kind)
      fail("variable '" + v + "' is used both as a reference and as an integer",
                       line, col);
    if (cur.node_type.empty() && !s.node_type.empty()) {
      cur.node_type = s.node_type;
      st->changed = true;
    } else if (!cur.node_type.empty() && !s.node_type.empty() && cur.node_type != s.node_type) {
      fail("variable '" + v + "' is used with record types '" + cur.node_type +
                           "' and '" + s.node_type + "'",
                       line, col);
    }
  }

  std::optional<Sort> lookup(const std::string& v, int line, int col) const {
    return *slot(v, line, col);
  }
};

// Known sort of an expression, if determined by its shape or variables.
std::optional<Sort> expr_sort(const InferCtx& cx, const RawExprPtr& e) {
  switch (e->kind) {
    case RawExpr::Kind::Null: return Sort::ptr();
    case RawExpr::Kind::Int:
    case RawExpr::Kind::Add:
    case RawExpr::Kind::Sub:
    case RawExpr::Kind::Mul:
    case RawExpr::Kind::Neg: return Sort::integer();
    case RawExpr::Kind::Var: return cx.lookup(e->var, e->line, e->col);
  }
  return std::nullopt;
}

// Force every variable occurring in `e` to Int.
void force_int_vars(const InferCtx& cx, const RawExprPtr& e) {
  if (!e) return;
  if (e->kind == RawExpr::Kind::Var) cx.note(e->var, Sort::integer(), e->line, e->col);
  if (e->kind == RawExpr::Kind::Null)
    fail("null in integer expression", e->line, e->col);
  force_int_vars(cx, e->a);
  force_int_vars(cx, e->b);
}

void constrain(const InferCtx& cx, const RawExprPtr& e, const Sort& s) {
  if (s.kind == Sort::Kind::Int) {
    force_int_vars(cx, e);
    return;
  }
  // reference position
  switch (e->kind) {
    case RawExpr::Kind::Var: cx.note(e->var, s, e->line, e->col); return;
    case RawExpr::Kind::Null: return;
    default:
      fail("arithmetic expression in reference position", e->line, e->col);
  }
}

void infer_atom(const InferCtx& cx, const RawAtom& a) {
  switch (a.kind) {
    case RawAtom::Kind::Emp:
    case RawAtom::Kind::True:
    case RawAtom::Kind::False: return;
    case RawAtom::Kind::PointsTo: {
      if (a.root->kind != RawExpr::Kind::Var)
        fail("points-to root must be a variable", a.line, a.col);
      cx.note(a.root->var, Sort::ptr(a.name), a.root->line, a.root->col);
      const il::DataDecl* d = nullptr;
      if (cx.decls) {
        for (const auto& dd : *cx.decls)
          if (dd.name == a.name) d = &dd;
        if (!d) fail("unknown record type '" + a.name + "'", a.line, a.col);
        if (d->fields.size() != a.args.size())
          fail("record '" + a.name + "' has " + std::to_string(d->fields.size()) +
                               " fields, " + std::to_string(a.args.size()) + " given",
                           a.line, a.col);
        for (size_t i = 0; i < a.args.size(); ++i) {
          const il::Type& ft = d->fields[i].second;
          constrain(cx, a.args[i],
                    ft.is_node() ? Sort::ptr(ft.node) : Sort::integer());
        }
      } else {
        // Shape alone cannot fix bare-variable fields; arithmetic shapes can.
        for (const auto& f : a.args) {
          auto s = expr_sort(cx, f);
          if (s && s->kind == Sort::Kind::Int && f->kind != RawExpr::Kind::Var)
            force_int_vars(cx, f);
        }
      }
      return;
    }
    case RawAtom::Kind::Pred: {
      auto it = cx.by_name->find(a.name);
      if (it == cx.by_name->end())
        fail("unknown predicate '" + a.name + "'", a.line, a.col);
      const RawDef* callee = it->second;
      if (callee->formals.size() != a.args.size())
        fail("predicate '" + a.name + "' takes " +
                             std::to_string(callee->formals.size()) + " arguments, " +
                             std::to_string(a.args.size()) + " given",
                         a.line, a.col);
      auto& fsorts = cx.st->formal_sorts[a.name];
      for (size_t i = 0; i < a.args.size(); ++i) {
        // forward: known formal sort constrains the argument
        if (fsorts[i]) constrain(cx, a.args[i], *fsorts[i]);
        // backward: argument shape constrains the formal
        auto s = expr_sort(cx, a.args[i]);
        if (s && !fsorts[i]) {
          fsorts[i] = s->kind == Sort::Kind::Ptr ? Sort::ptr(s->node_type) : Sort::integer();
          cx.st->changed = true;
        } else if (s && fsorts[i] && fsorts[i]->kind != s->kind) {
          fail("argument " + std::to_string(i + 1) + " of '" + a.name +
                               "' has the wrong sort",
                           a.args[i]->line, a.args[i]->col);
        }
      }
      return;
    }
    case RawAtom::Kind::Cmp: {
      if (a.op == "<" || a.op == "<=" || a.op == ">" || a.op == ">=") {
        force_int_vars(cx, a.lhs);
        force_int_vars(cx, a.rhs);
        return;
      }
      // = / != : reference comparison when either side is (or is known to
      // be) a reference; integer comparison when either side is arithmetic.
      auto ls = expr_sort(cx, a.lhs);
      auto rs = expr_sort(cx, a.rhs);
      if ((ls && ls->kind == Sort::Kind::Ptr) || (rs && rs->kind == Sort::Kind::Ptr)) {
        Sort hint = ls && ls->kind == Sort::Kind::Ptr ? *ls : *rs;
        constrain(cx, a.lhs, hint);
        constrain(cx, a.rhs, hint);
      } else if ((ls && ls->kind == Sort::Kind::Int) || (rs && rs->kind == Sort::Kind::Int)) {
        force_int_vars(cx, a.lhs);
        force_int_vars(cx, a.rhs);
      }
      // both unknown: wait for another pass
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// Elaboration

LinExpr to_linexpr(const RawExprPtr& e) {
  switch (e->kind) {
    case RawExpr::Kind::Int: return LinExpr::constant(e->k);
    case RawExpr::Kind::Var: return LinExpr::variable(e->var);
    case RawExpr::Kind::Null:
      fail("null in integer expression", e->line, e->col);
    case RawExpr::Kind::Neg: return to_linexpr(e->a).negated();
    case RawExpr::Kind::Add: {
      LinExpr l = to_linexpr(e->a);
      l.add(to_linexpr(e->b));
      return l;
    }
    case RawExpr::Kind::Sub: {
      LinExpr l = to_linexpr(e->a);
      l.add(to_linexpr(e->b), -1);
      return l;
    }
    case RawExpr::Kind::Mul: {
      LinExpr l = to_linexpr(e->a);
      LinExpr r = to_linexpr(e->b);
      if (!l.is_const() && !r.is_const())
        fail("nonlinear multiplication", e->line, e->col);
      LinExpr out;
      if (l.is_const()) out.add(r, l.k);
      else out.add(l, r.k);
      return out;
    }
  }
  fail("bad integer expression", e->line, e->col);
}

class Elaborator {
 public:
  Elaborator(const SpecParser& raw, const std::vector<il::DataDecl>* decls)
      : raw_(raw), decls_(decls) {
    for (const auto& d : raw.defs) {
      if (by_name_.count(d.name))
        fail("duplicate predicate '" + d.name + "'", d.line, d.col);
      by_name_[d.name] = &d;
      st_.formal_sorts[d.name].resize(d.formals.size());
    }
    infer();
  }

  SpecFile build() {
    SpecFile out;
    for (const auto& d : raw_.defs) {
      PredicateDef def;
      def.name = d.name;
      const auto& fsorts = st_.formal_sorts[d.name];
      for (size_t i = 0; i < d.formals.size(); ++i) {
        // Unconstrained formals default to references: inductive predicates
        // describe heap shapes, and an unused integer formal is harmless to
        // misread while an unused reference formal is common (e.g. a parent
        // pointer threaded through but never compared).
        Sort s = fsorts[i] ? *fsorts[i] : Sort::ptr();
        def.formals.push_back({d.formals[i], s});
      }
      for (const auto& disj : d.disjuncts) {
        InferCtx cx{&d, &disj, &st_, decls_, &by_name_};
        def.body.push_back(elaborate(cx, disj));
      }
      out.env.defs.emplace(def.name, std::move(def));
    }
    for (const auto& p : raw_.pres) {
      if (out.preconds.count(p.name))
        fail("duplicate precondition '" + p.name + "'", p.line, p.col);
      Formula f;
      for (const auto& disj : p.disjuncts) {
        InferCtx cx{nullptr, &disj, &st_, decls_, &by_name_};
        f.push_back(elaborate(cx, disj));
      }
      out.preconds.emplace(p.name, std::move(f));
    }
    classify_well_founded(out.env);
    return out;
  }

 private:
  void infer() {
    // Existentials must not shadow formals; reject early for clear errors.
    for (const auto& d : raw_.defs)
      for (const auto& disj : d.disjuncts)
        for (const auto& e : disj.ex_names)
          for (const auto& f : d.formals)
            if (e == f)
              fail("quantified variable '" + e + "' shadows a formal of '" +
                                   d.name + "'",
                               disj.line, disj.col);
    int rounds = 0;
    do {
      st_.changed = false;
      for (const auto& d : raw_.defs)
        for (const auto& disj : d.disjuncts) {
          InferCtx cx{&d, &disj, &st_, decls_, &by_name_};
          for (const auto& a : disj.atoms) infer_atom(cx, a);
        }
      for (const auto& p : raw_.pres)
        for (const auto& disj : p.disjuncts) {
          InferCtx cx{nullptr, &disj, &st_, decls_, &by_name_};
          for (const auto& a : disj.atoms) infer_atom(cx, a);
        }
      if (++rounds > 100)
        fail("sort inference did not converge", 1, 1);
    } while (st_.changed);
  }

  Sort resolved(const InferCtx& cx, const std::string& v, int line, int col) {
    auto s = cx.lookup(v, line, col);
    // Unconstrained disjunct-locals and globals default to integers: the
    // common leftover is a payload wildcard.
    return s ? *s : Sort::integer();
  }

  static Arg elaborate_arg(const RawExprPtr& e, const Sort& expected) {
    if (expected.kind == Sort::Kind::Ptr) {
      if (e->kind == RawExpr::Kind::Null) return Term::null();
      if (e->kind == RawExpr::Kind::Var) return Term::mk_var(e->var);
      fail("arithmetic expression in reference position", e->line, e->col);
    }
    return to_linexpr(e);
  }

  // Sort of an expression after inference, for positions with no expectation.
  Sort final_sort(InferCtx& cx, const RawExprPtr& e) {
    auto s = expr_sort(cx, e);
    if (s) return s->kind == Sort::Kind::Ptr ? Sort::ptr(s->node_type) : Sort::integer();
    if (e->kind == RawExpr::Kind::Var) return resolved(cx, e->var, e->line, e->col);
    return Sort::integer();
  }

  SymHeap elaborate(InferCtx& cx, const RawDisjunct& disj) {
    SymHeap h;
    for (const auto& v : disj.ex_names)
      h.bound.push_back({v, resolved(cx, v, disj.line, disj.col)});
    for (const auto& a : disj.atoms) {
      switch (a.kind) {
        case RawAtom::Kind::Emp:
        case RawAtom::Kind::True:
          break;
        case RawAtom::Kind::False:
          h.alias.push_back({false, Term::null(), Term::null()});
          break;
        case RawAtom::Kind::PointsTo: {
          PointsTo p;
          p.root = Term::mk_var(a.root->var);
          p.node_type = a.name;
          const il::DataDecl* d = nullptr;
          if (decls_)
            for (const auto& dd : *decls_)
              if (dd.name == a.name) d = &dd;
          for (size_t i = 0; i < a.args.size(); ++i) {
            Sort expected =
                d ? (d->fields[i].second.is_node() ? Sort::ptr(d->fields[i].second.node)
                                                   : Sort::integer())
                  : final_sort(cx, a.args[i]);
            p.fields.push_back(elaborate_arg(a.args[i], expected));
          }
          h.spatial.push_back(std::move(p));
          break;
        }
        case RawAtom::Kind::Pred: {
          PredApp pa;
          pa.name = a.name;
          const auto& fsorts = st_.formal_sorts[a.name];
          for (size_t i = 0; i < a.args.size(); ++i) {
            Sort expected = fsorts[i] ? *fsorts[i] : Sort::ptr();
            pa.args.push_back(elaborate_arg(a.args[i], expected));
          }
          h.spatial.push_back(std::move(pa));
          break;
        }
        case RawAtom::Kind::Cmp: {
          Sort ls = final_sort(cx, a.lhs);
          Sort rs = final_sort(cx, a.rhs);
          bool ptr_cmp = ls.kind == Sort::Kind::Ptr || rs.kind == Sort::Kind::Ptr;
          if (ptr_cmp) {
            if (a.op != "=" && a.op != "!=")
              fail("ordering comparison on references", a.line, a.col);
            auto term_of = [&](const RawExprPtr& e) -> Term {
              if (e->kind == RawExpr::Kind::Null) return Term::null();
              if (e->kind == RawExpr::Kind::Var) return Term::mk_var(e->var);
              fail("arithmetic expression compared with a reference", e->line,
                               e->col);
            };
            h.alias.push_back({a.op == "=", term_of(a.lhs), term_of(a.rhs)});
          } else {
            LinExpr d = to_linexpr(a.lhs);
            d.add(to_linexpr(a.rhs), -1);  // lhs - rhs
            ArithPtr atom;
            if (a.op == "=") {
              atom = Arith::mk_atom({ArithAtom::Op::Eq, d});
            } else if (a.op == "!=") {
              atom = Arith::mk_not(Arith::mk_atom({ArithAtom::Op::Eq, d}));
            } else if (a.op == "<=") {
              atom = Arith::mk_atom({ArithAtom::Op::Le, d});
            } else if (a.op == "<") {
              d.add(LinExpr::constant(1));
              atom = Arith::mk_atom({ArithAtom::Op::Le, d});
            } else if (a.op == ">=") {
              atom = Arith::mk_atom({ArithAtom::Op::Le, d.negated()});
            } else {  // >
              LinExpr nd = d.negated();
              nd.add(LinExpr::constant(1));
              atom = Arith::mk_atom({ArithAtom::Op::Le, nd});
            }
            conjoin(h, atom);
          }
          break;
        }
      }
    }
    return h;
  }

  const SpecParser& raw_;
  const std::vector<il::DataDecl>* decls_;
  std::map<std::string, const RawDef*> by_name_;
  SortState st_;
};

}  // namespace

SpecFile parse_spec(const std::string& text, const std::vector<il::DataDecl>* decls) {
  SpecParser p(text);
  p.parse();
  Elaborator e(p, decls);
  return e.build();
}

}  // namespace sepgen::sl
