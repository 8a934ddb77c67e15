#pragma once

// Well-typedness and well-formedness checking, cons-freeness, and the
// order / arrow-depth / unitary metrics of programs and types.

#include <map>
#include <string>
#include <vector>

#include "consfree/syntax.hpp"

namespace consfree {

// ---------------------------------------------------------------------------
// Type metrics.
// ---------------------------------------------------------------------------

struct TypeMetrics {
  int order;
  int arrow_depth;
  int length;
};

int type_order(const TypePtr& t);
int type_arrow_depth(const TypePtr& t);
int type_length(const TypePtr& t);
TypeMetrics type_metrics(const TypePtr& t);

// ---------------------------------------------------------------------------
// Type checking.
// ---------------------------------------------------------------------------

class TypeError : public std::runtime_error {
 public:
  // clause_index is -1 for program-level errors.
  TypeError(std::string message, int clause_index);
  int clause_index() const { return clause_index_; }

 private:
  int clause_index_;
};

struct TypedProgram {
  Program program;
  // Per clause: the unique variable environment and the clause's (residual)
  // type after consuming its pattern arguments.
  std::vector<std::map<std::string, TypePtr>> clause_envs;
  std::vector<TypePtr> clause_types;
  std::map<std::string, size_t> arities;  // per defined symbol with clauses
  std::string main_fun;                   // root of the first clause
  std::vector<TypePtr> main_arg_types;    // full arrow decomposition
  TypePtr main_result_type;
};

// Checks well-typedness and well-formedness; throws TypeError otherwise.
TypedProgram check_program(const Program& p);

// Synthesizes the type of an expression bottom-up under the environment.
// Throws TypeError on failure.
TypePtr infer_type(const Program& p, const std::map<std::string, TypePtr>& env,
                   const ExprPtr& e, int clause_index = -1);

// ---------------------------------------------------------------------------
// Analysis.
// ---------------------------------------------------------------------------

struct Offender {
  int clause_index;
  std::string subexpr;  // printed form
  std::string reason;
};

struct ConsFreeReport {
  bool cons_free = true;
  std::vector<bool> clause_cons_free;
  std::vector<Offender> offenders;
};

// A clause body's constructor-headed sub-expressions must each be ground
// data or a sub-expression of one of the clause's patterns.
ConsFreeReport check_cons_free(const TypedProgram& tp);

struct AnalysisReport {
  bool cons_free;
  bool deterministic;
  int data_order;
  int data_arrow_depth;
  bool unitary;
  std::vector<Offender> offending_locations;
};

AnalysisReport analyze(const TypedProgram& tp);

// Line-oriented key:value rendering with the stable keys cons_free,
// deterministic, data_order, arrow_depth, unitary.
std::string report_to_text(const AnalysisReport& r);

}  // namespace consfree
