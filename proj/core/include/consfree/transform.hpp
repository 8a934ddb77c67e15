#pragma once

// The normalization pipeline: eta-expansion of clauses with improper arrow
// bodies, lifting of conditional/choice heads over applications, excision of
// applications with improper arguments, removal of symbols with improper
// signatures, and a fresh entry-point wrapper.  Parameterized by the notion
// of a "proper" type (order bound, arrow-depth bound, or recursively
// unitary).  Also the signature rewrite that collapses trailing arrows for
// programs with unitary variables.

#include "consfree/typecheck.hpp"

namespace consfree {

class TransformError : public std::runtime_error {
 public:
  explicit TransformError(const std::string& message)
      : std::runtime_error(message) {}
};

struct Properness {
  enum class Mode { OrderAtMost, DepthAtMost, RecursivelyUnitary };
  Mode mode = Mode::OrderAtMost;
  int k = 0;

  bool proper(const TypePtr& t) const;
  // The data metric bounded by k in this mode (order, or arrow depth).
  int metric(const TypePtr& t) const;
};

// Prepends a fresh entry clause `start x1...xM = f1 x1...xM` (suffixed if the
// name is taken) so the main function becomes a plain wrapper.
TypedProgram add_start_wrapper(const TypedProgram& tp);

// While some clause's body type is an improper arrow type with a proper
// domain, appends a fresh variable to that clause (raising the root's arity
// across all of its clauses).
TypedProgram eta_expand_improper(const TypedProgram& tp,
                                 const Properness& props);

// Distributes applied if/choose heads over their applications until no
// `(if ...) t` or `choose(...) t` sub-expression remains.
TypedProgram lift_head_conditionals(const TypedProgram& tp);

// Replaces every leftmost-outermost application spine of proper type, headed
// by a variable or defined symbol, that has an argument of improper type by
// a fresh self-looping symbol of the same type.
TypedProgram excise_improper_args(const TypedProgram& tp,
                                  const Properness& props);

// Removes every defined symbol (and its clauses) whose signature has an
// improper component in its full arrow decomposition; fails if a surviving
// clause still references a removed symbol.
TypedProgram drop_improper_symbols(const TypedProgram& tp,
                                   const Properness& props);

// The full pipeline (eta-expand, lift, excise, drop, wrap); refuses programs
// whose data metric already exceeds the bound.
TypedProgram normalize(const TypedProgram& tp, const Properness& props);

// Verifies the pipeline's postconditions: every signature component is
// proper, and every sub-expression of every body has a proper type.  Throws
// TransformError with a description otherwise.
void check_normalized(const TypedProgram& tp, const Properness& props);

// The arrow-collapsing type rewrite: sorts unchanged, pairs componentwise,
// and an arrow sigma1 => ... => sigman => kappa with order(kappa) = 0
// becomes fixtype(sigma1) => kappa.
TypePtr fixtype(const TypePtr& t);

// Rewrites every signature componentwise (split at the symbol's arity) by
// fixtype and re-typechecks; requires a program normalized with
// recursively-unitary properness.
TypedProgram fixtype_signatures(const TypedProgram& tp);

}  // namespace consfree
