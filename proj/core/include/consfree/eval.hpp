#pragma once

// Reference call-by-value evaluator with exhaustive fuel-bounded enumeration
// of non-deterministic outcomes, plus the bounded data-universe constructor
// and the runtime safety check for cons-free programs.

#include <cstdint>
#include <map>
#include <optional>

#include "consfree/typecheck.hpp"

namespace consfree {

using Env = std::map<std::string, ValuePtr>;

struct EvalOutcome {
  ValueSet values;
  bool exhausted = true;  // true iff no branch hit the fuel bound
};

// The unique environment γ with lγ = v, or nullopt if the pattern does not
// match.
std::optional<Env> match_pattern(const PatternPtr& l, const ValuePtr& v);

// The bounded data universe: all constructor terms below some input or below
// some ground data expression in a clause body; closed under sub-terms.
// Pair values contribute their components, never themselves.
ValueSet compute_B(const Program& p, const std::vector<ValuePtr>& inputs);

// Evaluates an application of a defined symbol to the given values (data,
// pairs or closures).  The argument count may be below the symbol's arity
// (the results are closures) or above it (results are applied further).
// If trace is non-null, every value occurring in the derivation is recorded.
EvalOutcome eval_call(const TypedProgram& tp, const std::string& fun,
                      const std::vector<ValuePtr>& args, std::uint64_t fuel,
                      ValueSet* trace = nullptr);

// Program execution: applies the main function to the inputs, which must be
// data values matching its argument types (checked; TypeError otherwise).
EvalOutcome eval_all(const TypedProgram& tp,
                     const std::vector<ValuePtr>& inputs, std::uint64_t fuel,
                     ValueSet* trace = nullptr);

// Checks that a value is a data value of the given type.
bool data_has_type(const Program& p, const ValuePtr& v, const TypePtr& t);

// True iff every constructor term occurring in the trace lies in the bounded
// data universe of the given inputs.
bool check_safety(const Program& p, const std::vector<ValuePtr>& inputs,
                  const ValueSet& trace);

}  // namespace consfree
