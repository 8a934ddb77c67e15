#pragma once

// Extensional values (data, pairs, and type-tagged relations), the domination
// ordering, extensional application and matching, and the statement-saturation
// tabulation that computes the exact output set of a cons-free program without
// running it.  Two engines are provided: a literal full-rescan saturation over
// the complete statement space, and a demand-driven engine that only explores
// reachable calls and represents confirmed outputs by their maximal elements.

#include <cstdint>
#include <optional>
#include <vector>

#include <gmpxx.h>

#include "consfree/eval.hpp"
#include "consfree/transform.hpp"

namespace consfree {

// Raised on resource-ceiling refusals and on precondition violations
// (programs that build data, or deterministic-mode requests for programs
// containing choice).
class ExtensionalError : public std::runtime_error {
 public:
  explicit ExtensionalError(const std::string& message)
      : std::runtime_error(message) {}
};

// Deterministic mode interprets arrow types as partial functions; the
// non-deterministic mode as arbitrary relations.
enum class ExtMode { Deterministic, Nondeterministic };

// ---------------------------------------------------------------------------
// Extensional values.
// ---------------------------------------------------------------------------

struct ExtValue;
using ExtValuePtr = std::shared_ptr<const ExtValue>;
using ExtPair = std::pair<ExtValuePtr, ExtValuePtr>;

struct ExtValue {
  enum class Kind { Data, Pair, Relation };
  Kind kind;
  ValuePtr data;               // Data: a member of the bounded universe
  ExtValuePtr left, right;     // Pair
  TypePtr type_tag;            // Relation: the arrow type it inhabits
  std::vector<ExtPair> pairs;  // Relation: canonically sorted, deduplicated
};

ExtValuePtr ext_data(ValuePtr d);
ExtValuePtr ext_pair(ExtValuePtr left, ExtValuePtr right);
// Sorts and deduplicates the pair list.
ExtValuePtr ext_relation(TypePtr type_tag, std::vector<ExtPair> pairs);

int ext_compare(const ExtValuePtr& a, const ExtValuePtr& b);
bool ext_equal(const ExtValuePtr& a, const ExtValuePtr& b);

struct ExtLess {
  bool operator()(const ExtValuePtr& a, const ExtValuePtr& b) const {
    return ext_compare(a, b) < 0;
  }
};
using ExtSet = std::set<ExtValuePtr, ExtLess>;

std::string pretty_print(const ExtValuePtr& e);

// Data and pair runtime values convert losslessly; closures do not (nullptr).
ExtValuePtr value_to_ext(const ValuePtr& v);
// Inverse; nullptr if the value contains a relation.
ValuePtr ext_to_value(const ExtValuePtr& e);

// ---------------------------------------------------------------------------
// Interpretations of types over a bounded data universe.
// ---------------------------------------------------------------------------

// The number of extensional values of type t over the universe:
// |{d in B : d has sort iota}| for sorts, products for pairs, and for arrows
// (|codomain|+1)^|domain| partial functions or 2^(|domain|*|codomain|)
// relations depending on the mode.
mpz_class ext_count(const Program& p, const ValueSet& universe_b,
                    const TypePtr& t, ExtMode mode);

// All extensional values of type t, in canonical order.  Refuses (throws
// ExtensionalError) when the count exceeds the ceiling.
std::vector<ExtValuePtr> enumerate_ext(const Program& p,
                                       const ValueSet& universe_b,
                                       const TypePtr& t, ExtMode mode,
                                       std::uint64_t ceiling = 1u << 20);

// ---------------------------------------------------------------------------
// Operations on extensional values.
// ---------------------------------------------------------------------------

// Iterated extensional application: e() = {e}; e(u1..un) collects every o
// with (un, o) in some member of e(u1..u_{n-1}).  In deterministic mode the
// result has at most one element.
ExtSet ext_apply(const ExtValuePtr& e, const std::vector<ExtValuePtr>& args);

// The domination ordering: equality on data, componentwise on pairs, and on
// relations A >= B iff every (e, u) in B has some (e, u') in A with u' >= u.
bool ext_geq(const ExtValuePtr& a, const ExtValuePtr& b);

using ExtEnv = std::map<std::string, ExtValuePtr>;

// Matches a clause's pattern list against extensional arguments; variables
// bind whole values, pair patterns decompose pairs, constructor patterns
// match data values structurally.
std::optional<ExtEnv> ext_match(const std::vector<PatternPtr>& patterns,
                                const std::vector<ExtValuePtr>& args);

// Instantiates a pattern under an environment; constructor patterns build a
// data term, which must lie inside the universe (nullopt otherwise).
std::optional<ExtValuePtr> pattern_ext_instantiate(const PatternPtr& l,
                                                   const ExtEnv& env,
                                                   const ValueSet& universe_b);

// ---------------------------------------------------------------------------
// Tabulation.
// ---------------------------------------------------------------------------

enum class TabMetric { Order, Depth };

enum class TabEngine {
  // Explores only calls reachable from the entry point and keeps, per call,
  // the maximal confirmed outputs.  Always uses relational interpretations
  // internally (correct for deterministic programs as well).
  Demand,
  // Materializes the full statement space and re-scans every rule until no
  // statement flips, exactly as specified; deterministic mode uses
  // partial-function interpretations.
  Naive,
};

struct TabulateOptions {
  TabEngine engine = TabEngine::Demand;
  std::uint64_t max_statements = 2'000'000;     // naive engine ceiling
  std::uint64_t max_interpretation = 1u << 20;  // per-type enumeration ceiling
  std::uint64_t max_calls = 500'000;            // demand engine node ceiling
  // If non-null, the naive engine appends one confirmed statement per line,
  // canonically printed and sorted.
  std::string* statement_dump = nullptr;
};

// Computes { b | running the program on the inputs can yield b } without
// evaluation, by saturating a finite space of call and clause-body statements
// over the bounded data universe.  The program must not build data (checked);
// deterministic mode additionally requires a choice-free program.  The
// program is first normalized so that every type in it satisfies the metric
// bound k (order or arrow depth); a program whose own data metric exceeds k
// is refused with TransformError.
ValueSet tabulate(const TypedProgram& tp, const std::vector<ValuePtr>& inputs,
                  ExtMode mode, TabMetric metric, int k,
                  const TabulateOptions& options = {});

// exp2^K(N^L) where K is the type's order or arrow depth (per the metric) and
// L its length; an upper bound on the number of extensional values of the
// type over any universe with fewer than N elements.
mpz_class cardinality_bound(const TypePtr& t, unsigned long n,
                            TabMetric metric);

}  // namespace consfree
