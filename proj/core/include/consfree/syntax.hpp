#pragma once

// Abstract syntax, concrete parser, pretty-printer and structural utilities
// for a small higher-order functional language with pattern matching,
// non-deterministic choice, pairs and algebraic data types.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace consfree {

// ---------------------------------------------------------------------------
// Types:  sort | sigma * tau | sigma => tau
// ---------------------------------------------------------------------------

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
  enum class Kind { Sort, Pair, Arrow };
  Kind kind;
  std::string name;      // Sort
  TypePtr left, right;   // Pair: components; Arrow: domain / codomain
};

TypePtr sort_type(std::string name);
TypePtr pair_type(TypePtr left, TypePtr right);
TypePtr arrow_type(TypePtr from, TypePtr to);

int type_compare(const TypePtr& a, const TypePtr& b);
bool type_equal(const TypePtr& a, const TypePtr& b);

// ---------------------------------------------------------------------------
// Expressions.  Constructor applications are kept flattened (a constructor
// node carries exactly its declared argument count); all other applications
// are binary and left-associative.
// ---------------------------------------------------------------------------

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Var, Ctor, Fun, If, Choose, Pair, Apply };
  Kind kind;
  std::string name;             // Var / Ctor / Fun
  std::vector<ExprPtr> parts;   // Ctor args; If {cond,then,else}; Choose alts;
                                // Pair {left,right}; Apply {head,arg}
};

ExprPtr var_expr(std::string name);
ExprPtr ctor_expr(std::string name, std::vector<ExprPtr> args);
ExprPtr fun_expr(std::string name);
ExprPtr if_expr(ExprPtr cond, ExprPtr then_branch, ExprPtr else_branch);
ExprPtr choose_expr(std::vector<ExprPtr> alternatives);
ExprPtr pair_expr(ExprPtr left, ExprPtr right);
ExprPtr apply_expr(ExprPtr head, ExprPtr arg);

int expr_compare(const ExprPtr& a, const ExprPtr& b);
bool expr_equal(const ExprPtr& a, const ExprPtr& b);

struct ExprLess {
  bool operator()(const ExprPtr& a, const ExprPtr& b) const {
    return expr_compare(a, b) < 0;
  }
};
using ExprSet = std::set<ExprPtr, ExprLess>;

// ---------------------------------------------------------------------------
// Patterns and clauses.
// ---------------------------------------------------------------------------

struct Pattern;
using PatternPtr = std::shared_ptr<const Pattern>;

struct Pattern {
  enum class Kind { Var, Pair, Ctor };
  Kind kind;
  std::string name;               // Var / Ctor
  std::vector<PatternPtr> parts;  // Pair {left,right}; Ctor args
};

PatternPtr var_pattern(std::string name);
PatternPtr pair_pattern(PatternPtr left, PatternPtr right);
PatternPtr ctor_pattern(std::string name, std::vector<PatternPtr> args);

int pattern_compare(const PatternPtr& a, const PatternPtr& b);
bool pattern_equal(const PatternPtr& a, const PatternPtr& b);

// A pattern, viewed as the expression it denotes.
ExprPtr pattern_to_expr(const PatternPtr& p);

struct Clause {
  std::string root;
  std::vector<PatternPtr> patterns;
  ExprPtr body;
};

bool clause_equal(const Clause& a, const Clause& b);

// ---------------------------------------------------------------------------
// Programs.  `bool` (true/false) and `list` (cons/nil, over booleans) are
// built in; user data declarations add further sorts and constructors.
// Sorts live in their own namespace; constructor and defined-symbol names
// share one namespace and variables are the undeclared identifiers.
// ---------------------------------------------------------------------------

struct CtorSig {
  std::string name;
  std::vector<TypePtr> arg_types;
};

struct CtorInfo {
  std::string sort;
  std::vector<TypePtr> arg_types;
};

struct Program {
  std::vector<std::pair<std::string, std::vector<CtorSig>>> data_decls;
  std::vector<std::pair<std::string, TypePtr>> fun_sigs;  // declaration order
  std::vector<Clause> clauses;                            // textual order

  // Derived lookup tables (filled by finalize()).
  std::map<std::string, CtorInfo> ctors;
  std::set<std::string> sorts;
  std::map<std::string, TypePtr> fun_sig_map;

  // Rebuilds the lookup tables from the declaration lists; reports duplicate
  // or conflicting declarations.  Built-ins are added automatically.
  void finalize();

  const TypePtr* fun_sig(const std::string& name) const;
  bool is_ctor(const std::string& name) const { return ctors.count(name) > 0; }
  bool is_fun(const std::string& name) const {
    return fun_sig_map.count(name) > 0;
  }
};

bool program_equal(const Program& a, const Program& b);

// ---------------------------------------------------------------------------
// Runtime values: data terms, pairs, and closures (partial applications).
// ---------------------------------------------------------------------------

struct Value;
using ValuePtr = std::shared_ptr<const Value>;

struct Value {
  enum class Kind { Data, Pair, Closure };
  Kind kind;
  std::string name;             // Data: constructor; Closure: defined symbol
  std::vector<ValuePtr> parts;  // Data args / Pair {left,right} / Closure args
};

ValuePtr data_value(std::string ctor, std::vector<ValuePtr> args);
ValuePtr pair_value(ValuePtr left, ValuePtr right);
ValuePtr closure_value(std::string fun, std::vector<ValuePtr> args);

int value_compare(const ValuePtr& a, const ValuePtr& b);
bool value_equal(const ValuePtr& a, const ValuePtr& b);

struct ValueLess {
  bool operator()(const ValuePtr& a, const ValuePtr& b) const {
    return value_compare(a, b) < 0;
  }
};
using ValueSet = std::set<ValuePtr, ValueLess>;

// ---------------------------------------------------------------------------
// Parsing.
// ---------------------------------------------------------------------------

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Parses a whole program: data declarations, signatures and clauses.
Program parse_program(const std::string& text);

// Parses a ground data literal (constructor term, possibly with pair
// literals) over the given program's constructors.
ValuePtr parse_data(const std::string& text, const Program& program);

// Parses a type over the given program's sorts (used by tools and tests).
TypePtr parse_type(const std::string& text, const Program& program);

// ---------------------------------------------------------------------------
// Pretty-printing.  Round-trip law: parsing the printed form yields a
// structurally equal object.
// ---------------------------------------------------------------------------

std::string pretty_print(const TypePtr& t);
std::string pretty_print(const ExprPtr& e);
std::string pretty_print(const PatternPtr& p);
std::string pretty_print(const ValuePtr& v);
std::string pretty_print(const Clause& c);
std::string pretty_print(const Program& p);

// ---------------------------------------------------------------------------
// Structural utilities.
// ---------------------------------------------------------------------------

// The sub-expression relation: every t with e |>= t.  The head position of
// an application contributes only its strict sub-expressions.
ExprSet subexpressions(const ExprPtr& e);

// Free variables of an expression / variables bound by a pattern.
void collect_vars(const ExprPtr& e, std::set<std::string>& out);
void collect_vars(const PatternPtr& p, std::set<std::string>& out);

// True if the expression is a ground data term (constructors all the way
// down, no pairs, variables or defined symbols).
bool is_ground_data(const ExprPtr& e);

// Converts a ground data expression to a Value (nullptr if not ground data).
ValuePtr expr_to_data(const ExprPtr& e);

// Converts a Value back to an expression (closures are not representable and
// yield nullptr).
ExprPtr data_to_expr(const ValuePtr& v);

}  // namespace consfree
