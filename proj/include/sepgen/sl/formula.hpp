#pragma once

// Symbolic heaps: separation-logic formulas in a fixed normal form.
//
// A formula is a disjunction of symbolic heaps.  Each symbolic heap is
//   ex v1,...,vk . (spatial_1 * ... * spatial_n)  &  alias  &  arith
// where the spatial part is a flat list of points-to atoms and predicate
// applications, `alias` is a conjunction of (dis)equalities over reference
// terms, and `arith` is a boolean combination of linear integer atoms.
// Constructors re-establish the normal form (prenex existentials, flattened
// spatial list, alias kept as a literal conjunction).

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "sepgen/il/ast.hpp"

namespace sepgen::sl {

// ---------------------------------------------------------------------------
// Sorts and terms

struct Sort {
  enum class Kind { Ptr, Int };
  Kind kind = Kind::Ptr;
  std::string node_type;  // may be empty when the record type is unknown

  static Sort ptr(std::string node = {}) { return {Kind::Ptr, std::move(node)}; }
  static Sort integer() { return {Kind::Int, {}}; }
  bool is_ptr() const { return kind == Kind::Ptr; }
  bool operator==(const Sort&) const = default;
};

struct TypedVar {
  std::string name;
  Sort sort;
  bool operator==(const TypedVar&) const = default;
};

// Reference-sorted term: a variable or null.
struct Term {
  enum class Kind { Var, Null };
  Kind kind = Kind::Null;
  std::string var;

  static Term mk_var(std::string v) { return {Kind::Var, std::move(v)}; }
  static Term null() { return {Kind::Null, {}}; }
  bool is_var() const { return kind == Kind::Var; }
  bool is_null() const { return kind == Kind::Null; }
  auto operator<=>(const Term&) const = default;
  std::string str() const { return is_null() ? "null" : var; }
};

// Linear integer expression: sum of coeff*var plus a constant.
struct LinExpr {
  std::map<std::string, int64_t> coeff;  // zero coefficients are erased
  int64_t k = 0;

  static LinExpr constant(int64_t c) { return {{}, c}; }
  static LinExpr variable(const std::string& v) { return {{{v, 1}}, 0}; }
  bool is_const() const { return coeff.empty(); }
  // The single variable when the expression is 1*v + 0.
  std::optional<std::string> single_var() const {
    if (k == 0 && coeff.size() == 1 && coeff.begin()->second == 1)
      return coeff.begin()->first;
    return std::nullopt;
  }
  LinExpr& add(const LinExpr& o, int64_t scale = 1);
  LinExpr negated() const;
  bool operator==(const LinExpr&) const = default;
  auto operator<=>(const LinExpr&) const = default;
  std::string str() const;
};

// (Dis)equality literal over reference terms.
struct PureLit {
  bool positive = true;
  Term lhs, rhs;
  auto operator<=>(const PureLit&) const = default;
  std::string str() const { return lhs.str() + (positive ? " = " : " != ") + rhs.str(); }
};

// ---------------------------------------------------------------------------
// Arithmetic formulas (tree; atoms are `expr = 0` or `expr <= 0`)

struct ArithAtom {
  enum class Op { Eq, Le };
  Op op = Op::Eq;
  LinExpr expr;  // compared against zero
  auto operator<=>(const ArithAtom&) const = default;
  std::string str() const;
};

struct Arith;
using ArithPtr = std::shared_ptr<const Arith>;

struct Arith {
  enum class Kind { True, False, Atom, Not, And, Or };
  Kind kind = Kind::True;
  ArithAtom atom;
  ArithPtr a, b;

  static ArithPtr truth();
  static ArithPtr falsity();
  static ArithPtr mk_atom(ArithAtom at);
  static ArithPtr mk_not(ArithPtr x);
  static ArithPtr mk_and(ArithPtr x, ArithPtr y);
  static ArithPtr mk_or(ArithPtr x, ArithPtr y);
  bool is_true() const { return kind == Kind::True; }
  std::string str() const;
};

bool arith_equal(const ArithPtr& a, const ArithPtr& b);

// ---------------------------------------------------------------------------
// Spatial atoms

// Argument in a field or predicate-parameter position: a reference term or a
// linear integer expression (booleans are lowered to 0/1 integers).
using Arg = std::variant<Term, LinExpr>;

std::string arg_str(const Arg& a);
bool arg_is_ptr(const Arg& a);

struct PointsTo {
  Term root;  // a variable in well-formed input; null only via substitution
  std::string node_type;
  std::vector<Arg> fields;  // positional, per record declaration
  std::string str() const;
};

struct PredApp {
  std::string name;
  std::vector<Arg> args;
  bool marked = false;   // selected for unfolding by the fixpoint driver
  uint64_t occ_id = 0;   // stable occurrence identity (0 = unassigned)
  std::string str() const;
};

using SpatialAtom = std::variant<PointsTo, PredApp>;

struct SymHeap {
  std::vector<TypedVar> bound;       // prenex existentials
  std::vector<SpatialAtom> spatial;  // empty list = emp
  std::vector<PureLit> alias;        // conjunction of reference literals
  ArithPtr arith = Arith::truth();

  bool has_preds() const;
  std::string str() const;
};

// Disjunction of symbolic heaps.  Never empty for a parsed formula.
using Formula = std::vector<SymHeap>;

std::string formula_str(const Formula& f);

// ---------------------------------------------------------------------------
// Predicate environment

struct PredicateDef {
  std::string name;
  std::vector<TypedVar> formals;
  Formula body;
  // Set by well-foundedness classification: every recursive disjunct either
  // allocates a cell or strictly decreases a lower-bounded integer formal.
  bool well_founded = false;
};

struct PredEnv {
  std::map<std::string, PredicateDef> defs;
  const PredicateDef* find(const std::string& n) const {
    auto it = defs.find(n);
    return it == defs.end() ? nullptr : &it->second;
  }
};

struct SpecFile {
  PredEnv env;
  std::map<std::string, Formula> preconds;
};

// Parses predicate definitions and named preconditions.  When `decls` is
// given, points-to arity and field sorts are checked against it.  Throws
// il::ParseError on syntax errors, unbound (non-quantified) body variables,
// arity mismatches, or unresolvable sorts.
SpecFile parse_spec(const std::string& text,
                    const std::vector<il::DataDecl>* decls = nullptr);

// ---------------------------------------------------------------------------
// Operations on formulas

std::set<std::string> free_vars(const SymHeap& h);
std::set<std::string> free_vars(const Formula& f);
// Every variable name appearing anywhere (free or bound).
void collect_all_vars(const SymHeap& h, std::set<std::string>& out);

// Capture-avoiding substitution of `replacement` for free occurrences of
// variable `var`.  Reference replacement terms may flow into any position;
// integer replacements only into integer positions (sort errors throw).
SymHeap substitute(const SymHeap& h, const std::string& var, const Arg& replacement);
Formula substitute(const Formula& f, const std::string& var, const Arg& replacement);
// Simultaneous form (replacements do not see each other).
SymHeap substitute_many(const SymHeap& h, const std::map<std::string, Arg>& subst);

// Picks a name not in `used`, derived from `base` by bumping its numeric
// suffix ("n1" -> "n3" when n1, n2 are taken).  Deterministic.
std::string fresh_name(const std::string& base, const std::set<std::string>& used);

// Conjoins a reference literal / arithmetic constraint in place.
void conjoin(SymHeap& h, const PureLit& lit);
void conjoin(SymHeap& h, const ArithPtr& a);

// Star-composes the atoms (and existentials/pure parts) of `extra` onto `h`,
// renaming bound variables of `extra` away from names used in `h`.
SymHeap star(const SymHeap& h, const SymHeap& extra);

// Replaces the predicate occurrence identified by `occ_id` with each disjunct
// of its definition (formals substituted by actuals, bound variables
// freshened, marks inherited).  Occurrence ids for predicate applications
// introduced by the unfolding are drawn from *next_occ when provided.
// Freshening also avoids names in `avoid`, so that two formulas sharing the
// occurrence can be unfolded to identically-named results.
// Throws std::invalid_argument when the occurrence or definition is missing.
std::vector<SymHeap> unfold(const SymHeap& h, uint64_t occ_id, const PredEnv& env,
                            uint64_t* next_occ = nullptr,
                            const std::set<std::string>* avoid = nullptr);

// Assigns occurrence ids (start, start+1, ...) to every predicate
// application in spatial order; returns the next unused id.
uint64_t assign_occ_ids(SymHeap& h, uint64_t start = 1);

// The reference (dis)equality part of a heap.
inline const std::vector<PureLit>& alias_of(const SymHeap& h) { return h.alias; }

// Sort inference for a symbolic heap: bound variables carry their sorts;
// free-variable sorts are inferred from positions (points-to roots and
// reference literals are Ptr; arithmetic occurrences are Int; predicate
// arguments take the formal's sort).  Conflicts throw std::runtime_error.
std::map<std::string, Sort> infer_sorts(const SymHeap& h, const PredEnv& env,
                                        const std::vector<il::DataDecl>* decls = nullptr);

// Marks `def` (and every definition in env) as well-founded or not; returns
// the classification for diagnostics.  See PredicateDef::well_founded.
void classify_well_founded(PredEnv& env);

}  // namespace sepgen::sl
