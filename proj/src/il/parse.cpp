// Parser and printers for the core language.
//
// Surface form, line oriented:
//
//   data node { int val; node next; }
//   params node x, node y;
//   0: res := null
//   1: if (x = null) then goto 8 else goto 2
//   2: s := x.val + y.val
//   3: t := new node(s, res)
//   7: goto 1
//   8: assert true
//
// Statements are numbered consecutively from 0.  Jump targets must be
// integer constants.  '#' starts a comment running to end of line.

#include "sepgen/il/ast.hpp"

#include <cctype>
#include <set>
#include <sstream>

namespace sepgen::il {

namespace {

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

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }
  bool at(const std::string& punct_or_kw) const {
    return tok_.kind != Token::Kind::End && tok_.text == punct_or_kw;
  }
  bool accept(const std::string& s) {
    if (!at(s)) return false;
    advance();
    return true;
  }
  void expect(const std::string& s, const std::string& what) {
    if (!accept(s))
      throw ParseError(tok_.line, tok_.col,
                       "expected '" + s + "' " + what + ", got '" +
                           (tok_.kind == Token::Kind::End ? "<eof>" : tok_.text) + "'");
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(tok_.line, tok_.col, msg);
  }

 private:
  void advance() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') { ++line_; col_ = 1; ++pos_; continue; }
      if (c == '#') {  // comment to end of line
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) { ++col_; ++pos_; continue; }
      break;
    }
    tok_ = Token{};
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) { tok_.kind = Token::Kind::End; return; }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        consume();
      tok_.kind = Token::Kind::Ident;
      tok_.text = src_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
        consume();
      tok_.kind = Token::Kind::Int;
      tok_.text = src_.substr(start, pos_ - start);
      try {
        tok_.value = std::stoll(tok_.text);
      } catch (const std::out_of_range&) {
        throw ParseError(tok_.line, tok_.col, "integer literal out of range");
      }
      return;
    }
    // multi-char punctuation, longest match first
    static const char* puncts[] = {":=", "!=", "<=", ">=", "&&", "||"};
    for (const char* p : puncts) {
      if (src_.compare(pos_, 2, p) == 0) {
        tok_.kind = Token::Kind::Punct;
        tok_.text = p;
        consume(); consume();
        return;
      }
    }
    tok_.kind = Token::Kind::Punct;
    tok_.text = std::string(1, c);
    consume();
  }
  void consume() { ++col_; ++pos_; }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

class ProgramParser {
 public:
  explicit ProgramParser(const std::string& text) : lex_(text) {}

  Program parse() {
    while (lex_.at("data")) parse_data();
    if (lex_.at("params")) parse_params();
    int expected = 0;
    while (lex_.peek().kind != Token::Kind::End) {
      Token num = lex_.take();
      if (num.kind != Token::Kind::Int)
        throw ParseError(num.line, num.col, "expected statement number");
      if (num.value != expected)
        throw ParseError(num.line, num.col,
                         "statement numbered " + num.text + ", expected " +
                             std::to_string(expected));
      lex_.expect(":", "after statement number");
      Statement s = parse_statement();
      s.index = expected++;
      prog_.stmts.push_back(std::move(s));
    }
    validate();
    return std::move(prog_);
  }

 private:
  void parse_data() {
    lex_.expect("data", "");
    DataDecl d;
    d.name = ident("record name");
    if (prog_.find_decl(d.name))
      lex_.fail("duplicate record '" + d.name + "'");
    lex_.expect("{", "after record name");
    while (!lex_.accept("}")) {
      Type t = parse_type();
      std::string f = ident("field name");
      if (d.field_index(f) >= 0) lex_.fail("duplicate field '" + f + "'");
      lex_.expect(";", "after field");
      d.fields.emplace_back(std::move(f), std::move(t));
    }
    prog_.decls.push_back(std::move(d));
  }

  void parse_params() {
    lex_.expect("params", "");
    if (!lex_.accept(";")) {
      do {
        Type t = parse_type();
        std::string n = ident("parameter name");
        if (prog_.param_type(n)) lex_.fail("duplicate parameter '" + n + "'");
        prog_.params.emplace_back(std::move(n), std::move(t));
      } while (lex_.accept(","));
      lex_.expect(";", "after parameter list");
    }
  }

  Type parse_type() {
    Token t = lex_.take();
    if (t.kind != Token::Kind::Ident)
      throw ParseError(t.line, t.col, "expected type name");
    if (t.text == "int") return Type::integer();
    if (t.text == "bool") return Type::boolean();
    return Type::node_of(t.text);
  }

  Statement parse_statement() {
    Statement s;
    if (lex_.at("goto")) {
      lex_.take();
      s.kind = Statement::Kind::Goto;
      s.expr = parse_expr();
      return s;
    }
    if (lex_.at("assert")) {
      lex_.take();
      s.kind = Statement::Kind::Assert;
      s.expr = parse_expr();
      return s;
    }
    if (lex_.at("if")) {
      lex_.take();
      s.kind = Statement::Kind::Cond;
      s.expr = parse_expr();
      lex_.expect("then", "in conditional");
      lex_.expect("goto", "in conditional");
      s.then_target = parse_expr();
      lex_.expect("else", "in conditional");
      lex_.expect("goto", "in conditional");
      s.else_target = parse_expr();
      return s;
    }
    if (lex_.at("free")) {
      lex_.take();
      s.kind = Statement::Kind::Free;
      s.var = ident("variable after 'free'");
      return s;
    }
    std::string base = ident("statement");
    if (lex_.accept(".")) {
      s.kind = Statement::Kind::Store;
      s.var = base;
      s.field = ident("field name");
      lex_.expect(":=", "in field assignment");
      s.expr = parse_expr();
      return s;
    }
    lex_.expect(":=", "in assignment");
    if (lex_.at("new")) {
      lex_.take();
      s.kind = Statement::Kind::New;
      s.var = base;
      s.node_type = ident("record name after 'new'");
      lex_.expect("(", "after record name");
      if (!lex_.accept(")")) {
        do {
          s.args.push_back(ident("argument variable"));
        } while (lex_.accept(","));
        lex_.expect(")", "after arguments");
      }
      return s;
    }
    s.kind = Statement::Kind::Assign;
    s.var = base;
    s.expr = parse_expr();
    return s;
  }

  // Precedence climbing: || < && < comparison < additive < multiplicative < unary.
  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    ExprPtr e = parse_and();
    while (lex_.at("||")) {
      lex_.take();
      e = Expr::binop("||", e, parse_and());
    }
    return e;
  }
  ExprPtr parse_and() {
    ExprPtr e = parse_cmp();
    while (lex_.at("&&")) {
      lex_.take();
      e = Expr::binop("&&", e, parse_cmp());
    }
    return e;
  }
  ExprPtr parse_cmp() {
    ExprPtr e = parse_add();
    static const char* ops[] = {"=", "!=", "<=", ">=", "<", ">"};
    for (const char* op : ops) {
      if (lex_.at(op)) {
        lex_.take();
        return Expr::binop(op, e, parse_add());
      }
    }
    return e;
  }
  ExprPtr parse_add() {
    ExprPtr e = parse_mul();
    while (lex_.at("+") || lex_.at("-")) {
      std::string op = lex_.take().text;
      e = Expr::binop(op, e, parse_mul());
    }
    return e;
  }
  ExprPtr parse_mul() {
    ExprPtr e = parse_unary();
    while (lex_.at("*")) {
      lex_.take();
      e = Expr::binop("*", e, parse_unary());
    }
    return e;
  }
  ExprPtr parse_unary() {
    if (lex_.accept("!")) return Expr::unop("!", parse_unary());
    if (lex_.accept("-")) return Expr::unop("-", parse_unary());
    return parse_primary();
  }
  ExprPtr parse_primary() {
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Int) {
      // Copy before take(): the token buffer is re-lexed on advance.
      int64_t value = t.value;
      lex_.take();
      return Expr::integer(value);
    }
    if (lex_.accept("(")) {
      ExprPtr e = parse_expr();
      lex_.expect(")", "after expression");
      return e;
    }
    if (t.kind == Token::Kind::Ident) {
      std::string name = lex_.take().text;
      if (name == "null") return Expr::null();
      if (name == "true") return Expr::boolean(true);
      if (name == "false") return Expr::boolean(false);
      if (lex_.accept(".")) return Expr::load(name, ident("field name"));
      return Expr::variable(name);
    }
    lex_.fail("expected expression");
  }

  std::string ident(const std::string& what) {
    Token t = lex_.take();
    if (t.kind != Token::Kind::Ident)
      throw ParseError(t.line, t.col, "expected " + what);
    static const std::set<std::string> reserved = {
        "data", "params", "if", "then", "else", "goto", "assert",
        "new",  "free",   "null", "true", "false", "int", "bool"};
    if (reserved.count(t.text))
      throw ParseError(t.line, t.col, "'" + t.text + "' is reserved");
    return t.text;
  }

  // -- post-parse checks ----------------------------------------------------

  void collect_vars(const Expr& e, std::set<std::string>& used) {
    switch (e.kind) {
      case Expr::Kind::Var: used.insert(e.var); break;
      case Expr::Kind::FieldLoad: used.insert(e.var); break;
      case Expr::Kind::Binop:
        collect_vars(*e.lhs, used);
        collect_vars(*e.rhs, used);
        break;
      case Expr::Kind::Unop: collect_vars(*e.lhs, used); break;
      default: break;
    }
  }

  void require_const_target(const Expr& e, int n_stmts) {
    if (e.kind != Expr::Kind::IntConst)
      throw ParseError(1, 1, "jump targets must be integer constants");
    if (e.int_val < 0 || e.int_val > n_stmts)
      throw ParseError(1, 1, "jump target " + std::to_string(e.int_val) +
                                " out of range");
  }

  void validate() {
    const int n = static_cast<int>(prog_.stmts.size());
    std::set<std::string> defined, used;
    for (const auto& [p, t] : prog_.params) {
      (void)t;
      defined.insert(p);
    }
    for (const auto& s : prog_.stmts) {
      switch (s.kind) {
        case Statement::Kind::Assign:
          defined.insert(s.var);
          collect_vars(*s.expr, used);
          break;
        case Statement::Kind::New: {
          defined.insert(s.var);
          const DataDecl* d = prog_.find_decl(s.node_type);
          if (!d) throw ParseError(1, 1, "unknown record '" + s.node_type + "'");
          if (d->fields.size() != s.args.size())
            throw ParseError(1, 1, "new " + s.node_type + " expects " +
                                       std::to_string(d->fields.size()) +
                                       " argument(s)");
          for (const auto& a : s.args) used.insert(a);
          break;
        }
        case Statement::Kind::Store:
          used.insert(s.var);
          collect_vars(*s.expr, used);
          break;
        case Statement::Kind::Free:
          used.insert(s.var);
          break;
        case Statement::Kind::Goto:
          require_const_target(*s.expr, n);
          break;
        case Statement::Kind::Assert:
          collect_vars(*s.expr, used);
          break;
        case Statement::Kind::Cond:
          collect_vars(*s.expr, used);
          require_const_target(*s.then_target, n);
          require_const_target(*s.else_target, n);
          break;
      }
    }
    for (const auto& v : used)
      if (!defined.count(v))
        throw ParseError(1, 1, "undeclared variable '" + v + "'");
  }

  Lexer lex_;
  Program prog_;
};

}  // namespace

Program parse_program(const std::string& text) {
  return ProgramParser(text).parse();
}

// ---------------------------------------------------------------------------
// Printers

std::string Type::str() const {
  switch (kind) {
    case Kind::Int: return "int";
    case Kind::Bool: return "bool";
    case Kind::Node: return node;
  }
  return "?";
}

ExprPtr Expr::integer(int64_t v) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::IntConst;
  e->int_val = v;
  return e;
}
ExprPtr Expr::boolean(bool v) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::BoolConst;
  e->bool_val = v;
  return e;
}
ExprPtr Expr::null() {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Null;
  return e;
}
ExprPtr Expr::variable(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Var;
  e->var = std::move(name);
  return e;
}
ExprPtr Expr::load(std::string base, std::string field) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::FieldLoad;
  e->var = std::move(base);
  e->field = std::move(field);
  return e;
}
ExprPtr Expr::binop(std::string op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Binop;
  e->op = std::move(op);
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}
ExprPtr Expr::unop(std::string op, ExprPtr c) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Unop;
  e->op = std::move(op);
  e->lhs = std::move(c);
  return e;
}

std::string Expr::str() const {
  switch (kind) {
    case Kind::IntConst: return std::to_string(int_val);
    case Kind::BoolConst: return bool_val ? "true" : "false";
    case Kind::Null: return "null";
    case Kind::Var: return var;
    case Kind::FieldLoad: return var + "." + field;
    case Kind::Unop: return op + "(" + lhs->str() + ")";
    case Kind::Binop: return "(" + lhs->str() + " " + op + " " + rhs->str() + ")";
  }
  return "?";
}

std::string Statement::str() const {
  switch (kind) {
    case Kind::Assign: return var + " := " + expr->str();
    case Kind::Store: return var + "." + field + " := " + expr->str();
    case Kind::Goto: return "goto " + expr->str();
    case Kind::Assert: return "assert " + expr->str();
    case Kind::Cond:
      return "if " + expr->str() + " then goto " + then_target->str() +
             " else goto " + else_target->str();
    case Kind::New: {
      std::string s = var + " := new " + node_type + "(";
      for (size_t i = 0; i < args.size(); ++i) {
        if (i) s += ", ";
        s += args[i];
      }
      return s + ")";
    }
    case Kind::Free: return "free " + var;
  }
  return "?";
}

std::string Program::str() const {
  std::ostringstream os;
  for (const auto& d : decls) {
    os << "data " << d.name << " {";
    for (const auto& [f, t] : d.fields) os << " " << t.str() << " " << f << ";";
    os << " }\n";
  }
  os << "params";
  for (size_t i = 0; i < params.size(); ++i)
    os << (i ? ", " : " ") << params[i].second.str() << " " << params[i].first;
  os << ";\n";
  for (const auto& s : stmts) os << s.index << ": " << s.str() << "\n";
  return os.str();
}

std::string Value::str() const {
  if (is_null()) return "null";
  if (is_int()) return std::to_string(as_int());
  if (is_bool()) return as_bool() ? "true" : "false";
  return "L" + std::to_string(as_loc().id);
}

}  // namespace sepgen::il
