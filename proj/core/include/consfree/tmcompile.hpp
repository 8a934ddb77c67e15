#pragma once

// Deterministic Turing machines and their direct execution, counting-module
// generators (polynomial, exponential, and non-deterministic bitstring
// counting), and the compiler that turns a machine plus a step bound of the
// shape exp2^K(a*(n+1)^b) into an equivalent program that builds no data.

#include <cstdint>

#include "consfree/typecheck.hpp"

namespace consfree {

// ---------------------------------------------------------------------------
// Turing machines.
// ---------------------------------------------------------------------------

struct TmTransition {
  std::string write;
  char direction = 'R';  // 'L' or 'R'
  std::string next;
};

struct TmSpec {
  std::vector<std::string> alphabet;  // contains "0", "1" and "_" (blank)
  std::vector<std::string> states;    // contains start, accept and reject
  // Total and single-valued on (states minus accept/reject) x alphabet.
  std::map<std::pair<std::string, std::string>, TmTransition> transitions;
};

// Text format:
//   alphabet: 0 1 _
//   states: start accept reject ...
//   <state> <symbol> -> <write> <L|R> <nextstate>
// Blank lines and lines starting with '#' are ignored.  Throws ParseError on
// malformed input and on violated totality / single-valuedness.
TmSpec parse_tm(const std::string& text);

enum class TmResult { Accept, Reject, Timeout };

// Single right-infinite tape holding a blank at position 0 followed by the
// input bits, head starting at position 0 in the start state.  A left move
// at position 0 stays in place.
TmResult run_tm(const TmSpec& tm, const std::vector<bool>& input,
                std::uint64_t max_steps);

// ---------------------------------------------------------------------------
// Counting modules: a number type together with clauses for seed (the
// largest number), predecessor and zero test, all relative to the input
// list.  Generated symbol names carry the module's nesting tag as a suffix.
// ---------------------------------------------------------------------------

struct CountingModule {
  TypePtr number_type;
  std::vector<std::pair<std::string, TypePtr>> signatures;
  std::vector<Clause> clauses;
  std::string seed, pred, zero;  // always present
  std::string succ, equal;       // empty until extend_succ_equal
  std::string bound_description;  // the bound P(n), symbolically
  int data_order = 0;
  std::string tag;  // nesting path, e.g. "p31", "e1_p31", "er1_p11"
};

// Counts 0 .. a*(n+1)^b - 1 as (b+1)-tuples of boolean lists read as digits
// in base n+1; data order 0, deterministic.  Requires a, b >= 1.
CountingModule gen_count_poly(int a, int b);

// Counts 0 .. 2^P(n) - 1 by representing a bit string as a predicate on the
// inner module's numbers; raises the data order by one.  Extends the inner
// module with equality first when it lacks it.
CountingModule gen_count_exp(const CountingModule& inner);

// Counts 0 .. 2^(P(n)-1) - 1 by representing a bit string as a
// non-deterministic function from booleans to inner numbers; data order 1,
// uses choice, and relies on non-termination for bit tests.  Requires the
// inner module's data order to be at most 1.
CountingModule gen_count_nondet(const CountingModule& inner);

// Adds successor and equality clauses (succ_/sc_/equal_ with the module's
// tag) defined from seed, pred and zero; idempotent.
CountingModule extend_succ_equal(CountingModule m);

// A standalone well-typed program exercising the module: its entry point
// applies the zero test to `preds` predecessors of the seed.
Program counting_module_program(const CountingModule& m, int preds = 0);

// ---------------------------------------------------------------------------
// Compilation.
// ---------------------------------------------------------------------------

// Emits the simulation program for the machine: the machine's state, head
// position and tape contents at each time step are recomputed recursively,
// with time and position counted by the module counting up to
// exp2^k(a*(n+1)^b), which must dominate the machine's running time on the
// inputs of interest.  The result is deterministic, builds no data, has data
// order k, and every variable is unitary.  Throws ParseError on an invalid
// machine.
Program compile_tm(const TmSpec& tm, int a, int b, int k);

}  // namespace consfree
