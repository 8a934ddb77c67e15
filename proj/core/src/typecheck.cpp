#include "consfree/typecheck.hpp"

#include <algorithm>
#include <sstream>

namespace consfree {

// ---------------------------------------------------------------------------
// Type metrics.
// ---------------------------------------------------------------------------

int type_order(const TypePtr& t) {
  switch (t->kind) {
    case Type::Kind::Sort:
      return 0;
    case Type::Kind::Pair:
      return std::max(type_order(t->left), type_order(t->right));
    case Type::Kind::Arrow:
      return std::max(type_order(t->left) + 1, type_order(t->right));
  }
  return 0;
}

int type_arrow_depth(const TypePtr& t) {
  switch (t->kind) {
    case Type::Kind::Sort:
      return 0;
    case Type::Kind::Pair:
      return std::max(type_arrow_depth(t->left), type_arrow_depth(t->right));
    case Type::Kind::Arrow:
      return 1 + std::max(type_arrow_depth(t->left),
                          type_arrow_depth(t->right));
  }
  return 0;
}

int type_length(const TypePtr& t) {
  switch (t->kind) {
    case Type::Kind::Sort:
      return 1;
    case Type::Kind::Pair:
    case Type::Kind::Arrow:
      return type_length(t->left) + type_length(t->right);
  }
  return 0;
}

TypeMetrics type_metrics(const TypePtr& t) {
  return {type_order(t), type_arrow_depth(t), type_length(t)};
}

// ---------------------------------------------------------------------------
// Type checking.
// ---------------------------------------------------------------------------

TypeError::TypeError(std::string message, int clause_index)
    : std::runtime_error(clause_index >= 0
                             ? message + " (clause " +
                                   std::to_string(clause_index + 1) + ")"
                             : message),
      clause_index_(clause_index) {}

namespace {

[[noreturn]] void fail(const std::string& msg, int clause) {
  throw TypeError(msg, clause);
}

// Checks a pattern against an expected type, extending env; enforces
// linearity across the whole left-hand side.
void check_pattern(const Program& p, const PatternPtr& pat,
                   const TypePtr& expected,
                   std::map<std::string, TypePtr>& env, int clause) {
  switch (pat->kind) {
    case Pattern::Kind::Var: {
      if (!env.emplace(pat->name, expected).second)
        fail("left-hand side is not linear: variable " + pat->name +
                 " occurs twice",
             clause);
      return;
    }
    case Pattern::Kind::Pair: {
      if (expected->kind != Type::Kind::Pair)
        fail("pair pattern used at non-pair type " + pretty_print(expected),
             clause);
      check_pattern(p, pat->parts[0], expected->left, env, clause);
      check_pattern(p, pat->parts[1], expected->right, env, clause);
      return;
    }
    case Pattern::Kind::Ctor: {
      auto it = p.ctors.find(pat->name);
      if (it == p.ctors.end())
        fail("unknown constructor in pattern: " + pat->name, clause);
      if (expected->kind != Type::Kind::Sort || expected->name != it->second.sort)
        fail("constructor " + pat->name + " of sort " + it->second.sort +
                 " used at type " + pretty_print(expected),
             clause);
      if (pat->parts.size() != it->second.arg_types.size())
        fail("constructor " + pat->name + " applied to " +
                 std::to_string(pat->parts.size()) + " argument(s), expects " +
                 std::to_string(it->second.arg_types.size()),
             clause);
      for (size_t i = 0; i < pat->parts.size(); ++i)
        check_pattern(p, pat->parts[i], it->second.arg_types[i], env, clause);
      return;
    }
  }
}

}  // namespace

TypePtr infer_type(const Program& p, const std::map<std::string, TypePtr>& env,
                   const ExprPtr& e, int clause) {
  switch (e->kind) {
    case Expr::Kind::Var: {
      auto it = env.find(e->name);
      if (it == env.end())
        fail("variable " + e->name + " not bound by the left-hand side",
             clause);
      return it->second;
    }
    case Expr::Kind::Fun: {
      const TypePtr* sig = p.fun_sig(e->name);
      if (!sig) fail("defined symbol " + e->name + " has no signature", clause);
      return *sig;
    }
    case Expr::Kind::Ctor: {
      auto it = p.ctors.find(e->name);
      if (it == p.ctors.end())
        fail("unknown constructor: " + e->name, clause);
      if (e->parts.size() != it->second.arg_types.size())
        fail("constructor " + e->name + " applied to " +
                 std::to_string(e->parts.size()) + " argument(s), expects " +
                 std::to_string(it->second.arg_types.size()),
             clause);
      for (size_t i = 0; i < e->parts.size(); ++i) {
        TypePtr got = infer_type(p, env, e->parts[i], clause);
        if (!type_equal(got, it->second.arg_types[i]))
          fail("argument " + std::to_string(i + 1) + " of constructor " +
                   e->name + " has type " + pretty_print(got) + ", expected " +
                   pretty_print(it->second.arg_types[i]),
               clause);
      }
      return sort_type(it->second.sort);
    }
    case Expr::Kind::If: {
      TypePtr cond = infer_type(p, env, e->parts[0], clause);
      if (!(cond->kind == Type::Kind::Sort && cond->name == "bool"))
        fail("condition of if has type " + pretty_print(cond) +
                 ", expected bool",
             clause);
      TypePtr thn = infer_type(p, env, e->parts[1], clause);
      TypePtr els = infer_type(p, env, e->parts[2], clause);
      if (!type_equal(thn, els))
        fail("branches of if have different types: " + pretty_print(thn) +
                 " versus " + pretty_print(els),
             clause);
      return thn;
    }
    case Expr::Kind::Choose: {
      TypePtr first = infer_type(p, env, e->parts[0], clause);
      for (size_t i = 1; i < e->parts.size(); ++i) {
        TypePtr alt = infer_type(p, env, e->parts[i], clause);
        if (!type_equal(first, alt))
          fail("alternatives of choose have different types: " +
                   pretty_print(first) + " versus " + pretty_print(alt),
               clause);
      }
      return first;
    }
    case Expr::Kind::Pair:
      return pair_type(infer_type(p, env, e->parts[0], clause),
                       infer_type(p, env, e->parts[1], clause));
    case Expr::Kind::Apply: {
      TypePtr head = infer_type(p, env, e->parts[0], clause);
      if (head->kind != Type::Kind::Arrow)
        fail("application head has non-arrow type " + pretty_print(head),
             clause);
      TypePtr arg = infer_type(p, env, e->parts[1], clause);
      if (!type_equal(arg, head->left))
        fail("argument has type " + pretty_print(arg) + ", expected " +
                 pretty_print(head->left),
             clause);
      return head->right;
    }
  }
  fail("malformed expression", clause);
}

TypedProgram check_program(const Program& p) {
  TypedProgram tp;
  tp.program = p;
  tp.program.finalize();
  const Program& prog = tp.program;

  if (prog.clauses.empty()) fail("program has no clauses", -1);

  // Constructor declarations: order-0 argument types (the output type is a
  // sort by construction).
  for (auto& [name, info] : prog.ctors) {
    for (auto& at : info.arg_types)
      if (type_order(at) != 0)
        fail("constructor " + name + " has an argument of order > 0: " +
                 pretty_print(at),
             -1);
  }

  // Consistent arities, and every clause root must be declared.
  for (size_t i = 0; i < prog.clauses.size(); ++i) {
    const Clause& c = prog.clauses[i];
    if (!prog.is_fun(c.root))
      fail("clause root " + c.root + " has no signature",
           static_cast<int>(i));
    auto [it, fresh] = tp.arities.emplace(c.root, c.patterns.size());
    if (!fresh && it->second != c.patterns.size())
      fail("defined symbol " + c.root +
               " has clauses of inconsistent arity (" +
               std::to_string(it->second) + " and " +
               std::to_string(c.patterns.size()) + ")",
           static_cast<int>(i));
  }

  // Per-clause typing.
  for (size_t i = 0; i < prog.clauses.size(); ++i) {
    int ci = static_cast<int>(i);
    const Clause& c = prog.clauses[i];
    TypePtr sig = *prog.fun_sig(c.root);
    std::map<std::string, TypePtr> env;
    TypePtr residual = sig;
    for (auto& pat : c.patterns) {
      if (residual->kind != Type::Kind::Arrow)
        fail("clause for " + c.root + " has more arguments than its type " +
                 pretty_print(sig) + " admits",
             ci);
      check_pattern(prog, pat, residual->left, env, ci);
      residual = residual->right;
    }
    TypePtr body_type = infer_type(prog, env, c.body, ci);
    if (!type_equal(body_type, residual))
      fail("body of " + c.root + " has type " + pretty_print(body_type) +
               ", expected " + pretty_print(residual),
           ci);
    // Var(body) ⊆ Var(lhs) is implied by variable lookup during inference.
    tp.clause_envs.push_back(std::move(env));
    tp.clause_types.push_back(residual);
  }

  // Main function: every argument type and the result type must have order 0.
  tp.main_fun = prog.clauses[0].root;
  TypePtr mt = *prog.fun_sig(tp.main_fun);
  while (mt->kind == Type::Kind::Arrow) {
    if (type_order(mt->left) != 0)
      fail("main function " + tp.main_fun + " takes an argument of order > 0: " +
               pretty_print(mt->left),
           -1);
    tp.main_arg_types.push_back(mt->left);
    mt = mt->right;
  }
  if (type_order(mt) != 0)
    fail("main function " + tp.main_fun + " has a result of order > 0: " +
             pretty_print(mt),
         -1);
  tp.main_result_type = mt;
  return tp;
}

// ---------------------------------------------------------------------------
// Cons-freeness.
// ---------------------------------------------------------------------------

ConsFreeReport check_cons_free(const TypedProgram& tp) {
  ConsFreeReport report;
  for (size_t i = 0; i < tp.program.clauses.size(); ++i) {
    const Clause& c = tp.program.clauses[i];
    ExprSet pattern_subs;
    for (auto& pat : c.patterns) {
      ExprSet s = subexpressions(pattern_to_expr(pat));
      pattern_subs.insert(s.begin(), s.end());
    }
    bool clause_ok = true;
    for (auto& t : subexpressions(c.body)) {
      if (t->kind != Expr::Kind::Ctor) continue;
      if (is_ground_data(t)) continue;
      if (pattern_subs.count(t)) continue;
      clause_ok = false;
      report.offenders.push_back(
          {static_cast<int>(i), pretty_print(t),
           "constructor-headed sub-expression is neither ground data nor "
           "part of a pattern"});
    }
    report.clause_cons_free.push_back(clause_ok);
    report.cons_free = report.cons_free && clause_ok;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Analysis.
// ---------------------------------------------------------------------------

namespace {

bool has_choose(const ExprPtr& e) {
  if (e->kind == Expr::Kind::Choose) return true;
  for (auto& part : e->parts)
    if (has_choose(part)) return true;
  return false;
}

bool unitary_type(const TypePtr& t) {
  if (type_order(t) == 0) return true;
  return t->kind == Type::Kind::Arrow && type_order(t->right) == 0;
}

}  // namespace

AnalysisReport analyze(const TypedProgram& tp) {
  AnalysisReport r;
  ConsFreeReport cf = check_cons_free(tp);
  r.cons_free = cf.cons_free;
  r.offending_locations = std::move(cf.offenders);

  r.deterministic = true;
  for (auto& c : tp.program.clauses)
    if (has_choose(c.body)) r.deterministic = false;

  r.data_order = 0;
  r.data_arrow_depth = 0;
  r.unitary = true;
  for (auto& env : tp.clause_envs) {
    for (auto& [name, t] : env) {
      r.data_order = std::max(r.data_order, type_order(t));
      r.data_arrow_depth = std::max(r.data_arrow_depth, type_arrow_depth(t));
      if (!unitary_type(t)) r.unitary = false;
    }
  }
  return r;
}

std::string report_to_text(const AnalysisReport& r) {
  std::ostringstream os;
  os << "cons_free: " << (r.cons_free ? "yes" : "no") << "\n"
     << "deterministic: " << (r.deterministic ? "yes" : "no") << "\n"
     << "data_order: " << r.data_order << "\n"
     << "arrow_depth: " << r.data_arrow_depth << "\n"
     << "unitary: " << (r.unitary ? "yes" : "no") << "\n";
  return os.str();
}

}  // namespace consfree
