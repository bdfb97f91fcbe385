#pragma once

// Core intermediate language: record declarations, expressions, numbered
// statements, and the concrete value/state model the interpreter runs on.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sepgen::il {

// ---------------------------------------------------------------------------
// Types

struct Type {
  enum class Kind { Int, Bool, Node };
  Kind kind = Kind::Int;
  std::string node;  // record name, meaningful only when kind == Node

  static Type integer() { return {Kind::Int, {}}; }
  static Type boolean() { return {Kind::Bool, {}}; }
  static Type node_of(std::string name) { return {Kind::Node, std::move(name)}; }
  bool is_node() const { return kind == Kind::Node; }
  bool operator==(const Type&) const = default;
  std::string str() const;
};

struct DataDecl {
  std::string name;
  std::vector<std::pair<std::string, Type>> fields;

  // Index of a field, or -1 when the record has no such field.
  int field_index(const std::string& f) const {
    for (size_t i = 0; i < fields.size(); ++i)
      if (fields[i].first == f) return static_cast<int>(i);
    return -1;
  }
};

// ---------------------------------------------------------------------------
// Expressions (immutable trees, freely shared)

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { IntConst, BoolConst, Null, Var, FieldLoad, Binop, Unop };
  Kind kind;
  int64_t int_val = 0;
  bool bool_val = false;
  std::string var;    // Var name; FieldLoad base variable
  std::string field;  // FieldLoad field name
  std::string op;     // Binop/Unop operator spelling
  ExprPtr lhs, rhs;   // Binop children; Unop child in lhs

  static ExprPtr integer(int64_t v);
  static ExprPtr boolean(bool v);
  static ExprPtr null();
  static ExprPtr variable(std::string name);
  static ExprPtr load(std::string base, std::string field);
  static ExprPtr binop(std::string op, ExprPtr l, ExprPtr r);
  static ExprPtr unop(std::string op, ExprPtr e);
  std::string str() const;
};

// ---------------------------------------------------------------------------
// Statements

struct Statement {
  enum class Kind { Assign, Store, Goto, Assert, Cond, New, Free };
  Kind kind;
  int index = 0;            // position in the statement table
  std::string var;          // Assign/New target, Store base, Free operand
  std::string field;        // Store field
  ExprPtr expr;             // Assign/Store rhs, Goto/Assert/Cond expression
  ExprPtr then_target;      // Cond true target (constant)
  ExprPtr else_target;      // Cond false target (constant)
  std::string node_type;    // New record type
  std::vector<std::string> args;  // New field arguments
  std::string str() const;
};

struct Program {
  std::vector<DataDecl> decls;
  std::vector<std::pair<std::string, Type>> params;
  std::vector<Statement> stmts;

  const DataDecl* find_decl(const std::string& name) const {
    for (const auto& d : decls)
      if (d.name == name) return &d;
    return nullptr;
  }
  const Type* param_type(const std::string& name) const {
    for (const auto& p : params)
      if (p.first == name) return &p.second;
    return nullptr;
  }
  std::string str() const;
};

// ---------------------------------------------------------------------------
// Concrete values and states

struct Loc {
  uint32_t id = 0;
  auto operator<=>(const Loc&) const = default;
};

// A value is an integer, a boolean, a heap location, or null (monostate).
struct Value {
  std::variant<std::monostate, int64_t, bool, Loc> v;

  static Value null() { return {}; }
  static Value integer(int64_t i) { return {i}; }
  static Value boolean(bool b) { return {b}; }
  static Value loc(Loc l) { return {l}; }

  bool is_null() const { return std::holds_alternative<std::monostate>(v); }
  bool is_int() const { return std::holds_alternative<int64_t>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_loc() const { return std::holds_alternative<Loc>(v); }
  int64_t as_int() const { return std::get<int64_t>(v); }
  bool as_bool() const { return std::get<bool>(v); }
  Loc as_loc() const { return std::get<Loc>(v); }
  bool operator==(const Value&) const = default;
  std::string str() const;
};

struct Record {
  std::string node_type;
  std::vector<Value> fields;  // positional, per declaration order
  bool operator==(const Record&) const = default;
};

struct ConcreteState {
  std::map<Loc, Record> heap;
  std::map<std::string, Value> stack;
  bool operator==(const ConcreteState&) const = default;
};

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + msg),
        line(line), col(col) {}
};

// Parses the line-oriented program text; throws ParseError with location
// information on malformed input, unknown types/fields, non-constant jump
// targets, inconsistent variable typing, or use of never-defined variables.
Program parse_program(const std::string& text);

}  // namespace sepgen::il
