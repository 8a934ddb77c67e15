#include "consfree/transform.hpp"

#include <sstream>

namespace consfree {

// ---------------------------------------------------------------------------
// Properness.
// ---------------------------------------------------------------------------

namespace {

bool recursively_unitary(const TypePtr& t) {
  if (type_order(t) == 0) return true;
  switch (t->kind) {
    case Type::Kind::Pair:
      return recursively_unitary(t->left) && recursively_unitary(t->right);
    case Type::Kind::Arrow:
      return type_order(t->right) == 0 && recursively_unitary(t->left);
    case Type::Kind::Sort:
      return true;
  }
  return false;
}

}  // namespace

bool Properness::proper(const TypePtr& t) const {
  switch (mode) {
    case Mode::OrderAtMost:
      return type_order(t) <= k;
    case Mode::DepthAtMost:
      return type_arrow_depth(t) <= k;
    case Mode::RecursivelyUnitary:
      return type_order(t) <= k && recursively_unitary(t);
  }
  return false;
}

int Properness::metric(const TypePtr& t) const {
  return mode == Mode::DepthAtMost ? type_arrow_depth(t) : type_order(t);
}

// ---------------------------------------------------------------------------
// Shared helpers.
// ---------------------------------------------------------------------------

namespace {

void collect_identifiers(const Program& p, std::set<std::string>& out) {
  for (auto& [name, info] : p.ctors) out.insert(name);
  for (auto& [name, sig] : p.fun_sigs) out.insert(name);
  for (auto& s : p.sorts) out.insert(s);
  for (auto& c : p.clauses) {
    out.insert(c.root);
    for (auto& pat : c.patterns) collect_vars(pat, out);
    collect_vars(c.body, out);
  }
}

std::string fresh_name(const std::set<std::string>& used,
                       const std::string& base) {
  if (!used.count(base)) return base;
  for (int i = 1;; ++i) {
    std::string candidate = base + "_" + std::to_string(i);
    if (!used.count(candidate)) return candidate;
  }
}

TypedProgram recheck(Program p, const std::string& what) {
  try {
    return check_program(p);
  } catch (const TypeError& e) {
    throw TransformError(what + " produced an ill-typed program: " +
                         e.what());
  }
}

// 32-bit FNV-1a over the printed type, for reproducible fresh symbols.
std::string type_hash(const TypePtr& t) {
  std::string s = pretty_print(t);
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Entry-point wrapper.
// ---------------------------------------------------------------------------

TypedProgram add_start_wrapper(const TypedProgram& tp) {
  Program p = tp.program;
  std::set<std::string> used;
  collect_identifiers(p, used);
  std::string wrapper = fresh_name(used, "start");

  TypePtr main_sig = *p.fun_sig(tp.main_fun);
  Clause c;
  c.root = wrapper;
  ExprPtr body = fun_expr(tp.main_fun);
  for (size_t i = 0; i < tp.main_arg_types.size(); ++i) {
    std::string x = "x" + std::to_string(i + 1);
    c.patterns.push_back(var_pattern(x));
    body = apply_expr(body, var_expr(x));
  }
  c.body = body;
  p.fun_sigs.insert(p.fun_sigs.begin(), {wrapper, main_sig});
  p.clauses.insert(p.clauses.begin(), std::move(c));
  return recheck(std::move(p), "add_start_wrapper");
}

// ---------------------------------------------------------------------------
// Eta expansion.
// ---------------------------------------------------------------------------

TypedProgram eta_expand_improper(const TypedProgram& tp,
                                 const Properness& props) {
  TypedProgram cur = tp;
  for (;;) {
    // Roots whose clauses currently have an improper arrow body type with a
    // proper domain.
    std::set<std::string> expand;
    for (size_t i = 0; i < cur.program.clauses.size(); ++i) {
      const TypePtr& rt = cur.clause_types[i];
      if (rt->kind == Type::Kind::Arrow && !props.proper(rt) &&
          props.proper(rt->left))
        expand.insert(cur.program.clauses[i].root);
    }
    if (expand.empty()) return cur;

    Program p = cur.program;
    std::set<std::string> used;
    collect_identifiers(p, used);
    std::string x = fresh_name(used, "x");
    for (auto& c : p.clauses) {
      if (!expand.count(c.root)) continue;
      c.patterns.push_back(var_pattern(x));
      c.body = apply_expr(c.body, var_expr(x));
    }
    cur = recheck(std::move(p), "eta_expand_improper");
  }
}

// ---------------------------------------------------------------------------
// Lifting if/choose heads.
// ---------------------------------------------------------------------------

namespace {

ExprPtr lift_expr(const ExprPtr& e) {
  std::vector<ExprPtr> parts;
  parts.reserve(e->parts.size());
  for (auto& part : e->parts) parts.push_back(lift_expr(part));

  if (e->kind == Expr::Kind::Apply) {
    const ExprPtr& head = parts[0];
    const ExprPtr& arg = parts[1];
    if (head->kind == Expr::Kind::If) {
      return if_expr(head->parts[0],
                     lift_expr(apply_expr(head->parts[1], arg)),
                     lift_expr(apply_expr(head->parts[2], arg)));
    }
    if (head->kind == Expr::Kind::Choose) {
      std::vector<ExprPtr> alts;
      for (auto& alt : head->parts)
        alts.push_back(lift_expr(apply_expr(alt, arg)));
      return choose_expr(std::move(alts));
    }
  }

  switch (e->kind) {
    case Expr::Kind::Var:
    case Expr::Kind::Fun:
      return e;
    case Expr::Kind::Ctor:
      return ctor_expr(e->name, std::move(parts));
    case Expr::Kind::If:
      return if_expr(parts[0], parts[1], parts[2]);
    case Expr::Kind::Choose:
      return choose_expr(std::move(parts));
    case Expr::Kind::Pair:
      return pair_expr(parts[0], parts[1]);
    case Expr::Kind::Apply:
      return apply_expr(parts[0], parts[1]);
  }
  return e;
}

}  // namespace

TypedProgram lift_head_conditionals(const TypedProgram& tp) {
  Program p = tp.program;
  for (auto& c : p.clauses) c.body = lift_expr(c.body);
  return recheck(std::move(p), "lift_head_conditionals");
}

// ---------------------------------------------------------------------------
// Excision of applications with improper arguments.
// ---------------------------------------------------------------------------

namespace {

struct Exciser {
  const Program& prog;
  const std::map<std::string, TypePtr>& env;
  const Properness& props;
  int clause_index;
  // Accumulated fresh symbols, shared across clauses: printed type → name.
  std::map<std::string, std::pair<std::string, TypePtr>>& bots;
  std::set<std::string>& used;

  ExprPtr bot_for(const TypePtr& t) {
    std::string key = pretty_print(t);
    auto it = bots.find(key);
    if (it == bots.end()) {
      std::string name = fresh_name(used, "bot_" + type_hash(t));
      used.insert(name);
      it = bots.emplace(key, std::make_pair(name, t)).first;
    }
    return fun_expr(it->second.first);
  }

  // Pre-order (outermost-first, left-to-right) rewrite.
  ExprPtr rewrite(const ExprPtr& e) {
    if (e->kind == Expr::Kind::Apply) {
      // Decompose the application spine.
      std::vector<ExprPtr> args;
      ExprPtr base = e;
      while (base->kind == Expr::Kind::Apply) {
        args.push_back(base->parts[1]);
        base = base->parts[0];
      }
      if (base->kind == Expr::Kind::Var || base->kind == Expr::Kind::Fun) {
        TypePtr whole = infer_type(prog, env, e, clause_index);
        if (props.proper(whole)) {
          for (auto& a : args) {
            TypePtr at = infer_type(prog, env, a, clause_index);
            if (!props.proper(at)) return bot_for(whole);
          }
        }
      }
    }
    std::vector<ExprPtr> parts;
    parts.reserve(e->parts.size());
    for (auto& part : e->parts) parts.push_back(rewrite(part));
    switch (e->kind) {
      case Expr::Kind::Ctor:
        return ctor_expr(e->name, std::move(parts));
      case Expr::Kind::If:
        return if_expr(parts[0], parts[1], parts[2]);
      case Expr::Kind::Choose:
        return choose_expr(std::move(parts));
      case Expr::Kind::Pair:
        return pair_expr(parts[0], parts[1]);
      case Expr::Kind::Apply:
        return apply_expr(parts[0], parts[1]);
      default:
        return e;
    }
  }
};

}  // namespace

TypedProgram excise_improper_args(const TypedProgram& tp,
                                  const Properness& props) {
  Program p = tp.program;
  std::set<std::string> used;
  collect_identifiers(p, used);
  std::map<std::string, std::pair<std::string, TypePtr>> bots;
  for (size_t i = 0; i < p.clauses.size(); ++i) {
    Exciser ex{p, tp.clause_envs[i], props, static_cast<int>(i), bots, used};
    p.clauses[i].body = ex.rewrite(p.clauses[i].body);
  }
  for (auto& [key, entry] : bots) {
    p.fun_sigs.emplace_back(entry.first, entry.second);
    Clause c;
    c.root = entry.first;
    c.body = fun_expr(entry.first);
    p.clauses.push_back(std::move(c));
  }
  return recheck(std::move(p), "excise_improper_args");
}

// ---------------------------------------------------------------------------
// Removal of symbols with improper signatures.
// ---------------------------------------------------------------------------

namespace {

bool signature_proper(const TypePtr& sig, const Properness& props) {
  TypePtr t = sig;
  while (t->kind == Type::Kind::Arrow) {
    if (!props.proper(t->left)) return false;
    t = t->right;
  }
  return props.proper(t);
}

void collect_fun_refs(const ExprPtr& e, std::set<std::string>& out) {
  if (e->kind == Expr::Kind::Fun) out.insert(e->name);
  for (auto& part : e->parts) collect_fun_refs(part, out);
}

}  // namespace

TypedProgram drop_improper_symbols(const TypedProgram& tp,
                                   const Properness& props) {
  Program p = tp.program;
  std::set<std::string> bad;
  for (auto& [name, sig] : p.fun_sigs)
    if (!signature_proper(sig, props)) bad.insert(name);
  if (bad.empty()) return tp;

  std::vector<std::pair<std::string, TypePtr>> sigs;
  for (auto& entry : p.fun_sigs)
    if (!bad.count(entry.first)) sigs.push_back(entry);
  std::vector<Clause> clauses;
  for (auto& c : p.clauses) {
    if (bad.count(c.root)) continue;
    std::set<std::string> refs;
    collect_fun_refs(c.body, refs);
    for (auto& r : refs)
      if (bad.count(r))
        throw TransformError(
            "drop_improper_symbols: surviving clause for " + c.root +
            " still references removed symbol " + r);
    clauses.push_back(c);
  }
  p.fun_sigs = std::move(sigs);
  p.clauses = std::move(clauses);
  return recheck(std::move(p), "drop_improper_symbols");
}

// ---------------------------------------------------------------------------
// Pipeline and verification.
// ---------------------------------------------------------------------------

TypedProgram normalize(const TypedProgram& tp, const Properness& props) {
  AnalysisReport report = analyze(tp);
  int metric = props.mode == Properness::Mode::DepthAtMost
                   ? report.data_arrow_depth
                   : report.data_order;
  if (metric > props.k)
    throw TransformError("program's data metric " + std::to_string(metric) +
                         " exceeds the bound " + std::to_string(props.k));
  if (props.mode == Properness::Mode::RecursivelyUnitary && !report.unitary)
    throw TransformError(
        "program does not have unitary variables, as the chosen properness "
        "requires");

  TypedProgram out = eta_expand_improper(tp, props);
  out = lift_head_conditionals(out);
  out = excise_improper_args(out, props);
  out = drop_improper_symbols(out, props);
  out = add_start_wrapper(out);
  check_normalized(out, props);
  return out;
}

void check_normalized(const TypedProgram& tp, const Properness& props) {
  for (auto& [name, sig] : tp.program.fun_sigs)
    if (!signature_proper(sig, props))
      throw TransformError("symbol " + name +
                           " has an improper signature component: " +
                           pretty_print(sig));
  for (size_t i = 0; i < tp.program.clauses.size(); ++i) {
    for (auto& t : subexpressions(tp.program.clauses[i].body)) {
      TypePtr ty = infer_type(tp.program, tp.clause_envs[i], t,
                              static_cast<int>(i));
      if (!props.proper(ty))
        throw TransformError("sub-expression " + pretty_print(t) +
                             " of clause " + std::to_string(i + 1) +
                             " has improper type " + pretty_print(ty));
    }
  }
}

// ---------------------------------------------------------------------------
// The arrow-collapsing signature rewrite.
// ---------------------------------------------------------------------------

TypePtr fixtype(const TypePtr& t) {
  switch (t->kind) {
    case Type::Kind::Sort:
      return t;
    case Type::Kind::Pair:
      return pair_type(fixtype(t->left), fixtype(t->right));
    case Type::Kind::Arrow: {
      TypePtr tail = t->right;
      while (tail->kind == Type::Kind::Arrow) tail = tail->right;
      if (type_order(tail) == 0) return arrow_type(fixtype(t->left), tail);
      // Outside the intended domain; rewrite componentwise.
      return arrow_type(fixtype(t->left), fixtype(t->right));
    }
  }
  return t;
}

TypedProgram fixtype_signatures(const TypedProgram& tp) {
  Program p = tp.program;
  for (auto& [name, sig] : p.fun_sigs) {
    size_t m;
    auto it = tp.arities.find(name);
    if (it != tp.arities.end()) {
      m = it->second;
    } else {
      m = 0;
      for (TypePtr t = sig; t->kind == Type::Kind::Arrow; t = t->right) ++m;
    }
    std::vector<TypePtr> components;
    TypePtr residual = sig;
    for (size_t i = 0; i < m; ++i) {
      components.push_back(residual->left);
      residual = residual->right;
    }
    TypePtr rebuilt = fixtype(residual);
    for (size_t i = m; i-- > 0;)
      rebuilt = arrow_type(fixtype(components[i]), rebuilt);
    sig = rebuilt;
  }
  try {
    return check_program(p);
  } catch (const TypeError& e) {
    throw TransformError(
        std::string("fixtype_signatures precondition violated: ") + e.what());
  }
}

}  // namespace consfree
