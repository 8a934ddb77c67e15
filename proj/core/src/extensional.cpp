#include "consfree/extensional.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <functional>
#include <sstream>

namespace consfree {

namespace {

void decompose_arrow(const TypePtr& t, std::vector<TypePtr>& domains,
                     TypePtr& tail) {
  TypePtr cur = t;
  while (cur->kind == Type::Kind::Arrow) {
    domains.push_back(cur->left);
    cur = cur->right;
  }
  tail = cur;
}

TypePtr residual_after(const TypePtr& sig, size_t n) {
  TypePtr cur = sig;
  for (size_t i = 0; i < n; ++i) {
    assert(cur->kind == Type::Kind::Arrow);
    cur = cur->right;
  }
  return cur;
}

int pair_entry_compare(const ExtPair& a, const ExtPair& b) {
  int c = ext_compare(a.first, b.first);
  if (c != 0) return c;
  return ext_compare(a.second, b.second);
}

}  // namespace

// ---------------------------------------------------------------------------
// Extensional values.
// ---------------------------------------------------------------------------

ExtValuePtr ext_data(ValuePtr d) {
  auto e = std::make_shared<ExtValue>();
  e->kind = ExtValue::Kind::Data;
  e->data = std::move(d);
  return e;
}

ExtValuePtr ext_pair(ExtValuePtr left, ExtValuePtr right) {
  auto e = std::make_shared<ExtValue>();
  e->kind = ExtValue::Kind::Pair;
  e->left = std::move(left);
  e->right = std::move(right);
  return e;
}

ExtValuePtr ext_relation(TypePtr type_tag, std::vector<ExtPair> pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const ExtPair& a, const ExtPair& b) {
    return pair_entry_compare(a, b) < 0;
  });
  pairs.erase(std::unique(pairs.begin(), pairs.end(),
                          [](const ExtPair& a, const ExtPair& b) {
                            return pair_entry_compare(a, b) == 0;
                          }),
              pairs.end());
  auto e = std::make_shared<ExtValue>();
  e->kind = ExtValue::Kind::Relation;
  e->type_tag = std::move(type_tag);
  e->pairs = std::move(pairs);
  return e;
}

int ext_compare(const ExtValuePtr& a, const ExtValuePtr& b) {
  if (a == b) return 0;
  if (a->kind != b->kind)
    return static_cast<int>(a->kind) < static_cast<int>(b->kind) ? -1 : 1;
  switch (a->kind) {
    case ExtValue::Kind::Data:
      return value_compare(a->data, b->data);
    case ExtValue::Kind::Pair: {
      int c = ext_compare(a->left, b->left);
      if (c != 0) return c;
      return ext_compare(a->right, b->right);
    }
    case ExtValue::Kind::Relation: {
      int c = type_compare(a->type_tag, b->type_tag);
      if (c != 0) return c;
      if (a->pairs.size() != b->pairs.size())
        return a->pairs.size() < b->pairs.size() ? -1 : 1;
      for (size_t i = 0; i < a->pairs.size(); ++i) {
        c = pair_entry_compare(a->pairs[i], b->pairs[i]);
        if (c != 0) return c;
      }
      return 0;
    }
  }
  return 0;
}

bool ext_equal(const ExtValuePtr& a, const ExtValuePtr& b) {
  return ext_compare(a, b) == 0;
}

std::string pretty_print(const ExtValuePtr& e) {
  switch (e->kind) {
    case ExtValue::Kind::Data:
      return pretty_print(e->data);
    case ExtValue::Kind::Pair:
      return "(" + pretty_print(e->left) + ", " + pretty_print(e->right) + ")";
    case ExtValue::Kind::Relation: {
      std::string out = "{";
      bool first = true;
      for (const auto& [k, v] : e->pairs) {
        if (!first) out += ", ";
        first = false;
        out += pretty_print(k) + " -> " + pretty_print(v);
      }
      return out + "}";
    }
  }
  return "";
}

ExtValuePtr value_to_ext(const ValuePtr& v) {
  switch (v->kind) {
    case Value::Kind::Data:
      return ext_data(v);
    case Value::Kind::Pair: {
      ExtValuePtr l = value_to_ext(v->parts[0]);
      ExtValuePtr r = value_to_ext(v->parts[1]);
      if (!l || !r) return nullptr;
      return ext_pair(std::move(l), std::move(r));
    }
    case Value::Kind::Closure:
      return nullptr;
  }
  return nullptr;
}

ValuePtr ext_to_value(const ExtValuePtr& e) {
  switch (e->kind) {
    case ExtValue::Kind::Data:
      return e->data;
    case ExtValue::Kind::Pair: {
      ValuePtr l = ext_to_value(e->left);
      ValuePtr r = ext_to_value(e->right);
      if (!l || !r) return nullptr;
      return pair_value(std::move(l), std::move(r));
    }
    case ExtValue::Kind::Relation:
      return nullptr;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Interpretations.
// ---------------------------------------------------------------------------

mpz_class ext_count(const Program& p, const ValueSet& universe_b,
                    const TypePtr& t, ExtMode mode) {
  switch (t->kind) {
    case Type::Kind::Sort: {
      mpz_class n = 0;
      for (const auto& d : universe_b)
        if (data_has_type(p, d, t)) ++n;
      return n;
    }
    case Type::Kind::Pair:
      return ext_count(p, universe_b, t->left, mode) *
             ext_count(p, universe_b, t->right, mode);
    case Type::Kind::Arrow: {
      mpz_class dom = ext_count(p, universe_b, t->left, mode);
      mpz_class cod = ext_count(p, universe_b, t->right, mode);
      if (mode == ExtMode::Deterministic) {
        if (!dom.fits_ulong_p())
          throw ExtensionalError("interpretation of " + pretty_print(t) +
                                 " is too large to count");
        mpz_class base = cod + 1;
        mpz_class out;
        mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), dom.get_ui());
        return out;
      }
      mpz_class bits = dom * cod;
      if (!bits.fits_ulong_p())
        throw ExtensionalError("interpretation of " + pretty_print(t) +
                               " is too large to count");
      mpz_class out = 1;
      mpz_mul_2exp(out.get_mpz_t(), out.get_mpz_t(), bits.get_ui());
      return out;
    }
  }
  return 0;
}

std::vector<ExtValuePtr> enumerate_ext(const Program& p,
                                       const ValueSet& universe_b,
                                       const TypePtr& t, ExtMode mode,
                                       std::uint64_t ceiling) {
  mpz_class count = ext_count(p, universe_b, t, mode);
  if (count > ceiling)
    throw ExtensionalError("interpretation of " + pretty_print(t) + " has " +
                           count.get_str() +
                           " elements, above the enumeration ceiling of " +
                           std::to_string(ceiling));
  std::vector<ExtValuePtr> out;
  switch (t->kind) {
    case Type::Kind::Sort: {
      for (const auto& d : universe_b)
        if (data_has_type(p, d, t)) out.push_back(ext_data(d));
      break;
    }
    case Type::Kind::Pair: {
      auto ls = enumerate_ext(p, universe_b, t->left, mode, ceiling);
      auto rs = enumerate_ext(p, universe_b, t->right, mode, ceiling);
      for (const auto& l : ls)
        for (const auto& r : rs) out.push_back(ext_pair(l, r));
      break;
    }
    case Type::Kind::Arrow: {
      auto dom = enumerate_ext(p, universe_b, t->left, mode, ceiling);
      auto cod = enumerate_ext(p, universe_b, t->right, mode, ceiling);
      if (mode == ExtMode::Deterministic) {
        // Partial functions: an odometer over |dom| digits, each digit
        // selecting "undefined" or a codomain element.
        std::vector<size_t> digit(dom.size(), 0);
        while (true) {
          std::vector<ExtPair> pairs;
          for (size_t i = 0; i < dom.size(); ++i)
            if (digit[i] > 0) pairs.push_back({dom[i], cod[digit[i] - 1]});
          out.push_back(ext_relation(t, std::move(pairs)));
          size_t i = 0;
          while (i < digit.size() && digit[i] == cod.size()) digit[i++] = 0;
          if (i == digit.size()) break;
          ++digit[i];
        }
      } else {
        // Arbitrary relations: every subset of dom x cod.
        std::vector<ExtPair> all;
        for (const auto& d : dom)
          for (const auto& c : cod) all.push_back({d, c});
        assert(all.size() < 64);
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << all.size());
             ++mask) {
          std::vector<ExtPair> pairs;
          for (size_t i = 0; i < all.size(); ++i)
            if (mask & (std::uint64_t{1} << i)) pairs.push_back(all[i]);
          out.push_back(ext_relation(t, std::move(pairs)));
        }
      }
      break;
    }
  }
  std::sort(out.begin(), out.end(), ExtLess{});
  return out;
}

// ---------------------------------------------------------------------------
// Application, ordering, matching.
// ---------------------------------------------------------------------------

ExtSet ext_apply(const ExtValuePtr& e, const std::vector<ExtValuePtr>& args) {
  ExtSet current = {e};
  for (const auto& u : args) {
    ExtSet next;
    for (const auto& a : current) {
      if (a->kind != ExtValue::Kind::Relation) continue;
      for (const auto& [k, o] : a->pairs)
        if (ext_equal(k, u)) next.insert(o);
    }
    current = std::move(next);
  }
  return current;
}

bool ext_geq(const ExtValuePtr& a, const ExtValuePtr& b) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ExtValue::Kind::Data:
      return value_equal(a->data, b->data);
    case ExtValue::Kind::Pair:
      return ext_geq(a->left, b->left) && ext_geq(a->right, b->right);
    case ExtValue::Kind::Relation: {
      for (const auto& [e, u] : b->pairs) {
        bool found = false;
        for (const auto& [e2, u2] : a->pairs)
          if (ext_equal(e2, e) && ext_geq(u2, u)) {
            found = true;
            break;
          }
        if (!found) return false;
      }
      return true;
    }
  }
  return false;
}

namespace {

bool match_ext_inside_data(const PatternPtr& l, const ValuePtr& v,
                           ExtEnv& env) {
  switch (l->kind) {
    case Pattern::Kind::Var: {
      ExtValuePtr e = value_to_ext(v);
      if (!e) return false;
      env[l->name] = std::move(e);
      return true;
    }
    case Pattern::Kind::Pair:
      return v->kind == Value::Kind::Pair &&
             match_ext_inside_data(l->parts[0], v->parts[0], env) &&
             match_ext_inside_data(l->parts[1], v->parts[1], env);
    case Pattern::Kind::Ctor: {
      if (v->kind != Value::Kind::Data || v->name != l->name ||
          v->parts.size() != l->parts.size())
        return false;
      for (size_t i = 0; i < l->parts.size(); ++i)
        if (!match_ext_inside_data(l->parts[i], v->parts[i], env)) return false;
      return true;
    }
  }
  return false;
}

bool match_ext_one(const PatternPtr& l, const ExtValuePtr& e, ExtEnv& env) {
  switch (l->kind) {
    case Pattern::Kind::Var:
      env[l->name] = e;
      return true;
    case Pattern::Kind::Pair:
      return e->kind == ExtValue::Kind::Pair &&
             match_ext_one(l->parts[0], e->left, env) &&
             match_ext_one(l->parts[1], e->right, env);
    case Pattern::Kind::Ctor:
      return e->kind == ExtValue::Kind::Data &&
             match_ext_inside_data(l, e->data, env);
  }
  return false;
}

}  // namespace

std::optional<ExtEnv> ext_match(const std::vector<PatternPtr>& patterns,
                                const std::vector<ExtValuePtr>& args) {
  if (patterns.size() != args.size()) return std::nullopt;
  ExtEnv env;
  for (size_t i = 0; i < patterns.size(); ++i)
    if (!match_ext_one(patterns[i], args[i], env)) return std::nullopt;
  return env;
}

namespace {

// The runtime value denoted by a pattern (or constructor-headed expression)
// under an extensional environment; nullptr when a bound value is relational
// or the shape is not data-like.
ValuePtr pattern_value_subst(const PatternPtr& l, const ExtEnv& env) {
  switch (l->kind) {
    case Pattern::Kind::Var: {
      auto it = env.find(l->name);
      if (it == env.end()) return nullptr;
      return ext_to_value(it->second);
    }
    case Pattern::Kind::Pair: {
      ValuePtr a = pattern_value_subst(l->parts[0], env);
      ValuePtr b = pattern_value_subst(l->parts[1], env);
      if (!a || !b) return nullptr;
      return pair_value(std::move(a), std::move(b));
    }
    case Pattern::Kind::Ctor: {
      std::vector<ValuePtr> parts;
      for (const auto& part : l->parts) {
        ValuePtr v = pattern_value_subst(part, env);
        if (!v) return nullptr;
        parts.push_back(std::move(v));
      }
      return data_value(l->name, std::move(parts));
    }
  }
  return nullptr;
}

ValuePtr expr_value_subst(const ExprPtr& t, const ExtEnv& env) {
  switch (t->kind) {
    case Expr::Kind::Var: {
      auto it = env.find(t->name);
      if (it == env.end()) return nullptr;
      return ext_to_value(it->second);
    }
    case Expr::Kind::Pair: {
      ValuePtr a = expr_value_subst(t->parts[0], env);
      ValuePtr b = expr_value_subst(t->parts[1], env);
      if (!a || !b) return nullptr;
      return pair_value(std::move(a), std::move(b));
    }
    case Expr::Kind::Ctor: {
      std::vector<ValuePtr> parts;
      for (const auto& part : t->parts) {
        ValuePtr v = expr_value_subst(part, env);
        if (!v) return nullptr;
        parts.push_back(std::move(v));
      }
      return data_value(t->name, std::move(parts));
    }
    default:
      return nullptr;
  }
}

}  // namespace

std::optional<ExtValuePtr> pattern_ext_instantiate(
    const PatternPtr& l, const ExtEnv& env, const ValueSet& universe_b) {
  switch (l->kind) {
    case Pattern::Kind::Var: {
      auto it = env.find(l->name);
      if (it == env.end()) return std::nullopt;
      return it->second;
    }
    case Pattern::Kind::Pair: {
      auto a = pattern_ext_instantiate(l->parts[0], env, universe_b);
      auto b = pattern_ext_instantiate(l->parts[1], env, universe_b);
      if (!a || !b) return std::nullopt;
      return ext_pair(*a, *b);
    }
    case Pattern::Kind::Ctor: {
      ValuePtr v = pattern_value_subst(l, env);
      if (!v || universe_b.count(v) == 0) return std::nullopt;
      return ext_data(std::move(v));
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Tabulation.
// ---------------------------------------------------------------------------

namespace {

size_t arity_of(const TypedProgram& tp, const std::string& f) {
  auto it = tp.arities.find(f);
  if (it != tp.arities.end()) return it->second;
  const TypePtr* sig = tp.program.fun_sig(f);
  assert(sig);
  std::vector<TypePtr> domains;
  TypePtr tail;
  decompose_arrow(*sig, domains, tail);
  return domains.size();
}

// Flattens a (binary, left-associated) application spine.
ExprPtr spine_head(const ExprPtr& t, std::vector<ExprPtr>& args) {
  ExprPtr cur = t;
  std::vector<ExprPtr> rev;
  while (cur->kind == Expr::Kind::Apply) {
    rev.push_back(cur->parts[1]);
    cur = cur->parts[0];
  }
  args.assign(rev.rbegin(), rev.rend());
  return cur;
}

struct TabContext {
  const TypedProgram* norm = nullptr;
  ValueSet universe_b;
  ExtMode mode;
  Properness props;
  TabulateOptions opts;
  std::map<std::string, std::vector<ExtValuePtr>> enum_cache;
  // Per clause, the synthesized type of every body sub-expression.
  std::vector<std::map<ExprPtr, TypePtr, ExprLess>> subexpr_types;

  const std::vector<ExtValuePtr>& universe(const TypePtr& t, ExtMode m) {
    std::string key =
        (m == ExtMode::Deterministic ? "d " : "n ") + pretty_print(t);
    auto it = enum_cache.find(key);
    if (it != enum_cache.end()) return it->second;
    auto vals = enumerate_ext(norm->program, universe_b, t, m,
                              opts.max_interpretation);
    return enum_cache.emplace(key, std::move(vals)).first->second;
  }

  const TypePtr& type_of(int clause, const ExprPtr& t) const {
    return subexpr_types[clause].at(t);
  }

  void build_subexpr_types() {
    const TypedProgram& tp = *norm;
    subexpr_types.resize(tp.program.clauses.size());
    for (size_t i = 0; i < tp.program.clauses.size(); ++i)
      for (const auto& t : subexpressions(tp.program.clauses[i].body))
        subexpr_types[i][t] =
            infer_type(tp.program, tp.clause_envs[i], t, static_cast<int>(i));
  }

  std::vector<size_t> clauses_of(const std::string& f) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < norm->program.clauses.size(); ++i)
      if (norm->program.clauses[i].root == f) out.push_back(i);
    return out;
  }
};

ExtValuePtr ext_true() {
  static const ExtValuePtr t = ext_data(data_value("true", {}));
  return t;
}
ExtValuePtr ext_false() {
  static const ExtValuePtr f = ext_data(data_value("false", {}));
  return f;
}

// ---------------------------------------------------------------------------
// The literal full-rescan engine: materializes every statement and re-applies
// every confirmation rule until no statement flips.
// ---------------------------------------------------------------------------

struct Statement {
  bool is_call = false;
  // Call statements:  |- f e1 ... en ~> o
  std::string fun;
  std::vector<ExtValuePtr> args;
  // Body statements:  eta |- t ~> o  for a sub-expression t of clause's body
  int clause = -1;
  ExtEnv env;
  ExprPtr sub;
  ExtValuePtr out;
  bool confirmed = false;
};

int ext_vector_compare(const std::vector<ExtValuePtr>& a,
                       const std::vector<ExtValuePtr>& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (size_t i = 0; i < a.size(); ++i) {
    int c = ext_compare(a[i], b[i]);
    if (c != 0) return c;
  }
  return 0;
}

int ext_env_compare(const ExtEnv& a, const ExtEnv& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end(); ++ia, ++ib) {
    int c = ia->first.compare(ib->first);
    if (c != 0) return c;
    c = ext_compare(ia->second, ib->second);
    if (c != 0) return c;
  }
  return 0;
}

struct CallKey {
  const std::string* fun;
  const std::vector<ExtValuePtr>* args;
  const ExtValuePtr* out;
};
struct CallKeyLess {
  bool operator()(const CallKey& a, const CallKey& b) const {
    int c = a.fun->compare(*b.fun);
    if (c != 0) return c < 0;
    c = ext_vector_compare(*a.args, *b.args);
    if (c != 0) return c < 0;
    return ext_compare(*a.out, *b.out) < 0;
  }
};
struct BodyKey {
  int clause;
  const ExtEnv* env;
  const ExprPtr* sub;
  const ExtValuePtr* out;
};
struct BodyKeyLess {
  bool operator()(const BodyKey& a, const BodyKey& b) const {
    if (a.clause != b.clause) return a.clause < b.clause;
    int c = ext_env_compare(*a.env, *b.env);
    if (c != 0) return c < 0;
    c = expr_compare(*a.sub, *b.sub);
    if (c != 0) return c < 0;
    return ext_compare(*a.out, *b.out) < 0;
  }
};

class NaiveEngine {
 public:
  explicit NaiveEngine(TabContext& cx) : cx_(cx) {}

  ValueSet run(const std::vector<ExtValuePtr>& root_args) {
    build();
    seed();
    saturate();
    if (cx_.opts.statement_dump) dump();
    ValueSet result;
    const TypedProgram& tp = *cx_.norm;
    for (const auto& o :
         cx_.universe(tp.main_result_type, cx_.mode))
      if (call_confirmed(tp.main_fun, root_args, o)) {
        ValuePtr v = ext_to_value(o);
        assert(v);
        result.insert(std::move(v));
      }
    return result;
  }

 private:
  TabContext& cx_;
  // A deque: the index maps hold pointers into elements, which must survive
  // later insertions.
  std::deque<Statement> stmts_;
  std::map<CallKey, size_t, CallKeyLess> call_index_;
  std::map<BodyKey, size_t, BodyKeyLess> body_index_;

  void add_statement(Statement s) {
    if (stmts_.size() >= cx_.opts.max_statements)
      throw ExtensionalError(
          "statement space exceeds the ceiling of " +
          std::to_string(cx_.opts.max_statements) + " statements");
    stmts_.push_back(std::move(s));
    Statement& st = stmts_.back();
    size_t idx = stmts_.size() - 1;
    if (st.is_call)
      call_index_[CallKey{&st.fun, &st.args, &st.out}] = idx;
    else
      body_index_[BodyKey{st.clause, &st.env, &st.sub, &st.out}] = idx;
  }

  bool call_confirmed(const std::string& f,
                      const std::vector<ExtValuePtr>& args,
                      const ExtValuePtr& o) const {
    auto it = call_index_.find(CallKey{&f, &args, &o});
    return it != call_index_.end() && stmts_[it->second].confirmed;
  }

  bool body_confirmed(int clause, const ExtEnv& env, const ExprPtr& t,
                      const ExtValuePtr& o) const {
    auto it = body_index_.find(BodyKey{clause, &env, &t, &o});
    return it != body_index_.end() && stmts_[it->second].confirmed;
  }

  void build() {
    const TypedProgram& tp = *cx_.norm;
    // Call statements, restricted to residual types within the metric bound.
    for (const auto& [f, sig] : tp.program.fun_sigs) {
      size_t ar = arity_of(tp, f);
      std::vector<TypePtr> domains;
      TypePtr tail;
      decompose_arrow(sig, domains, tail);
      for (size_t n = 0; n <= ar; ++n) {
        TypePtr res = residual_after(sig, n);
        if (cx_.props.metric(res) > cx_.props.k) continue;
        const auto& outs = cx_.universe(res, cx_.mode);
        std::vector<ExtValuePtr> args(n);
        std::function<void(size_t)> rec = [&](size_t i) {
          if (i == n) {
            for (const auto& o : outs) {
              Statement s;
              s.is_call = true;
              s.fun = f;
              s.args = args;
              s.out = o;
              add_statement(std::move(s));
            }
            return;
          }
          for (const auto& e : cx_.universe(domains[i], cx_.mode)) {
            args[i] = e;
            rec(i + 1);
          }
        };
        rec(0);
      }
    }
    // Body statements: every ext-environment for the clause, every body
    // sub-expression, every output of its type.
    for (size_t ci = 0; ci < tp.program.clauses.size(); ++ci) {
      const Clause& cl = tp.program.clauses[ci];
      std::vector<std::pair<std::string, TypePtr>> vars(
          tp.clause_envs[ci].begin(), tp.clause_envs[ci].end());
      ExtEnv env;
      std::function<void(size_t)> rec = [&](size_t i) {
        if (i == vars.size()) {
          // The instantiated patterns must land inside the interpretations;
          // constructor patterns must build terms of the bounded universe.
          for (const auto& l : cl.patterns)
            if (!pattern_ext_instantiate(l, env, cx_.universe_b)) return;
          for (const auto& t : subexpressions(cl.body))
            for (const auto& o : cx_.universe(
                     cx_.type_of(static_cast<int>(ci), t), cx_.mode)) {
              Statement s;
              s.clause = static_cast<int>(ci);
              s.env = env;
              s.sub = t;
              s.out = o;
              add_statement(std::move(s));
            }
          return;
        }
        for (const auto& e : cx_.universe(vars[i].second, cx_.mode)) {
          env[vars[i].first] = e;
          rec(i + 1);
        }
        env.erase(vars[i].first);
      };
      rec(0);
    }
  }

  void seed() {
    for (Statement& s : stmts_) {
      if (s.is_call) continue;
      if (s.sub->kind == Expr::Kind::Var) {
        auto it = s.env.find(s.sub->name);
        s.confirmed = it != s.env.end() && ext_geq(it->second, s.out);
      } else if (s.sub->kind == Expr::Kind::Ctor) {
        ValuePtr v = expr_value_subst(s.sub, s.env);
        s.confirmed = v && s.out->kind == ExtValue::Kind::Data &&
                      value_equal(v, s.out->data);
      }
    }
  }

  void saturate() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (Statement& s : stmts_)
        if (!s.confirmed && try_confirm(s)) {
          s.confirmed = true;
          changed = true;
        }
    }
  }

  bool try_confirm(const Statement& s) {
    if (s.is_call) return try_confirm_call(s);
    return try_confirm_body(s);
  }

  bool try_confirm_call(const Statement& s) {
    const TypedProgram& tp = *cx_.norm;
    size_t ar = arity_of(tp, s.fun);
    const TypePtr& sig = *tp.program.fun_sig(s.fun);
    if (s.args.size() < ar) {
      // Partial call: the relation output is confirmed when each of its
      // pairs is dominated by a confirmed one-step-extended call.
      assert(s.out->kind == ExtValue::Kind::Relation);
      TypePtr res = residual_after(sig, s.args.size() + 1);
      for (const auto& [e, u] : s.out->pairs) {
        std::vector<ExtValuePtr> extended = s.args;
        extended.push_back(e);
        bool found = false;
        for (const auto& u2 : cx_.universe(res, cx_.mode))
          if (ext_geq(u2, u) && call_confirmed(s.fun, extended, u2)) {
            found = true;
            break;
          }
        if (!found) return false;
      }
      return true;
    }
    // Full call: committed first-match clause selection.
    for (size_t ci : cx_.clauses_of(s.fun)) {
      const Clause& cl = tp.program.clauses[ci];
      auto env = ext_match(cl.patterns, s.args);
      if (!env) continue;
      return body_confirmed(static_cast<int>(ci), *env, cl.body, s.out);
    }
    return false;
  }

  // Enumerates argument tuples whose component statements are confirmed and
  // calls the sink; stops early once the sink accepts.
  bool each_confirmed_tuple(const Statement& s,
                            const std::vector<ExprPtr>& args,
                            std::vector<ExtValuePtr>& chosen, size_t i,
                            const std::function<bool()>& sink) {
    if (i == args.size()) return sink();
    for (const auto& e :
         cx_.universe(cx_.type_of(s.clause, args[i]), cx_.mode)) {
      if (!body_confirmed(s.clause, s.env, args[i], e)) continue;
      chosen[i] = e;
      if (each_confirmed_tuple(s, args, chosen, i + 1, sink)) return true;
    }
    return false;
  }

  bool try_confirm_body(const Statement& s) {
    const TypedProgram& tp = *cx_.norm;
    switch (s.sub->kind) {
      case Expr::Kind::Var:
      case Expr::Kind::Ctor:
        return false;  // decided at seeding time
      case Expr::Kind::If: {
        const auto& parts = s.sub->parts;
        if (body_confirmed(s.clause, s.env, parts[0], ext_true()) &&
            body_confirmed(s.clause, s.env, parts[1], s.out))
          return true;
        return body_confirmed(s.clause, s.env, parts[0], ext_false()) &&
               body_confirmed(s.clause, s.env, parts[2], s.out);
      }
      case Expr::Kind::Choose: {
        for (const auto& alt : s.sub->parts)
          if (body_confirmed(s.clause, s.env, alt, s.out)) return true;
        return false;
      }
      case Expr::Kind::Pair: {
        if (s.out->kind != ExtValue::Kind::Pair) return false;
        return body_confirmed(s.clause, s.env, s.sub->parts[0], s.out->left) &&
               body_confirmed(s.clause, s.env, s.sub->parts[1], s.out->right);
      }
      case Expr::Kind::Fun:
        // A bare symbol is a call with zero arguments.
        return call_confirmed(s.sub->name, {}, s.out);
      case Expr::Kind::Apply: {
        std::vector<ExprPtr> args;
        ExprPtr head = spine_head(s.sub, args);
        std::vector<ExtValuePtr> chosen(args.size());
        if (head->kind == Expr::Kind::Var) {
          auto it = s.env.find(head->name);
          if (it == s.env.end()) return false;
          const ExtValuePtr& fn = it->second;
          return each_confirmed_tuple(s, args, chosen, 0, [&]() {
            for (const auto& o2 : ext_apply(fn, chosen))
              if (ext_geq(o2, s.out)) return true;
            return false;
          });
        }
        assert(head->kind == Expr::Kind::Fun);
        size_t k = arity_of(tp, head->name);
        const TypePtr& sig = *tp.program.fun_sig(head->name);
        return each_confirmed_tuple(s, args, chosen, 0, [&]() {
          if (args.size() <= k)
            return call_confirmed(head->name, chosen, s.out);
          std::vector<ExtValuePtr> first(chosen.begin(), chosen.begin() + k);
          std::vector<ExtValuePtr> rest(chosen.begin() + k, chosen.end());
          TypePtr res = residual_after(sig, k);
          for (const auto& u : cx_.universe(res, cx_.mode)) {
            if (!call_confirmed(head->name, first, u)) continue;
            for (const auto& o2 : ext_apply(u, rest))
              if (ext_geq(o2, s.out)) return true;
          }
          return false;
        });
      }
    }
    return false;
  }

  void dump() {
    std::vector<std::string> lines;
    for (const Statement& s : stmts_) {
      if (!s.confirmed) continue;
      std::ostringstream os;
      if (s.is_call) {
        os << "call " << s.fun << "(";
        for (size_t i = 0; i < s.args.size(); ++i)
          os << (i ? ", " : "") << pretty_print(s.args[i]);
        os << ") ~> " << pretty_print(s.out);
      } else {
        os << "body " << s.clause << " {";
        bool first = true;
        for (const auto& [x, v] : s.env) {
          os << (first ? "" : ", ") << x << " := " << pretty_print(v);
          first = false;
        }
        os << "} |- " << pretty_print(s.sub) << " ~> " << pretty_print(s.out);
      }
      lines.push_back(os.str());
    }
    std::sort(lines.begin(), lines.end());
    for (const auto& line : lines) *cx_.opts.statement_dump += line + "\n";
  }
};

// ---------------------------------------------------------------------------
// The demand-driven engine: explores only calls reachable from the entry
// point and keeps, per full-arity call, the maximal confirmed outputs.  Since
// confirmed output sets are downward closed under domination and clause
// bodies are monotone in their environments, the maximal elements determine
// the whole confirmed set; relational interpretations are used throughout,
// which yields the same final answer for choice-free programs as well.
// ---------------------------------------------------------------------------

class DemandEngine {
 public:
  explicit DemandEngine(TabContext& cx) : cx_(cx) {}

  ValueSet run(const std::vector<ExtValuePtr>& root_args) {
    const TypedProgram& tp = *cx_.norm;
    demand(tp.main_fun, root_args);
    bool grew = true;
    while (grew) {
      grew = false;
      changed_ = false;
      std::vector<Key> keys;
      keys.reserve(outs_.size());
      for (const auto& [key, value] : outs_) keys.push_back(key);
      for (const auto& key : keys) {
        ExtSet result = eval_call(key.first, key.second);
        ExtSet& slot = outs_.at(key);
        for (const auto& v : result)
          if (antichain_add(slot, v)) changed_ = true;
      }
      grew = changed_;
    }
    ValueSet result;
    for (const auto& o : outs_.at(Key{tp.main_fun, root_args})) {
      ValuePtr v = ext_to_value(o);
      assert(v);
      result.insert(std::move(v));
    }
    return result;
  }

 private:
  using Key = std::pair<std::string, std::vector<ExtValuePtr>>;
  struct KeyLess {
    bool operator()(const Key& a, const Key& b) const {
      int c = a.first.compare(b.first);
      if (c != 0) return c < 0;
      return ext_vector_compare(a.second, b.second) < 0;
    }
  };

  TabContext& cx_;
  std::map<Key, ExtSet, KeyLess> outs_;
  bool changed_ = false;

  static bool antichain_add(ExtSet& s, const ExtValuePtr& v) {
    for (const auto& m : s)
      if (ext_geq(m, v)) return false;
    for (auto it = s.begin(); it != s.end();)
      if (ext_geq(v, *it))
        it = s.erase(it);
      else
        ++it;
    s.insert(v);
    return true;
  }

  const ExtSet& demand(const std::string& f,
                       const std::vector<ExtValuePtr>& args) {
    auto it = outs_.find(Key{f, args});
    if (it == outs_.end()) {
      if (outs_.size() >= cx_.opts.max_calls)
        throw ExtensionalError("demand engine exceeds the ceiling of " +
                               std::to_string(cx_.opts.max_calls) +
                               " distinct calls");
      it = outs_.emplace(Key{f, args}, ExtSet{}).first;
      changed_ = true;
    }
    return it->second;
  }

  ExtSet eval_call(const std::string& f,
                   const std::vector<ExtValuePtr>& args) {
    const TypedProgram& tp = *cx_.norm;
    for (size_t ci : cx_.clauses_of(f)) {
      const Clause& cl = tp.program.clauses[ci];
      auto env = ext_match(cl.patterns, args);
      if (!env) continue;
      return body_eval(*env, cl.body);
    }
    return {};
  }

  // The maximal confirmed output of a partial application: the graph mapping
  // every next-argument value to the maximal outputs of the extended call.
  ExtValuePtr build_partial(const std::string& f,
                            const std::vector<ExtValuePtr>& args) {
    const TypedProgram& tp = *cx_.norm;
    const TypePtr& sig = *tp.program.fun_sig(f);
    size_t ar = arity_of(tp, f);
    TypePtr res = residual_after(sig, args.size());
    assert(res->kind == Type::Kind::Arrow);
    std::vector<ExtPair> pairs;
    for (const auto& e :
         cx_.universe(res->left, ExtMode::Nondeterministic)) {
      std::vector<ExtValuePtr> extended = args;
      extended.push_back(e);
      if (extended.size() == ar) {
        ExtSet copy = demand(f, extended);
        for (const auto& u : copy) pairs.push_back({e, u});
      } else {
        pairs.push_back({e, build_partial(f, extended)});
      }
    }
    return ext_relation(res, std::move(pairs));
  }

  // Applies candidate relations to argument positions from `from` on; a
  // relation pair fires when its key is dominated by some confirmed
  // (maximal) value of the corresponding argument.
  ExtSet apply_down(ExtSet current, const std::vector<ExtSet>& argsets,
                    size_t from) {
    for (size_t i = from; i < argsets.size(); ++i) {
      ExtSet next;
      for (const auto& r : current) {
        if (r->kind != ExtValue::Kind::Relation) continue;
        for (const auto& [e, w] : r->pairs) {
          bool fires = false;
          for (const auto& m : argsets[i])
            if (ext_geq(m, e)) {
              fires = true;
              break;
            }
          if (fires) antichain_add(next, w);
        }
      }
      current = std::move(next);
    }
    return current;
  }

  void each_combo(const std::vector<ExtSet>& sets, size_t count,
                  std::vector<ExtValuePtr>& chosen, size_t i,
                  const std::function<void()>& sink) {
    if (i == count) {
      sink();
      return;
    }
    for (const auto& e : sets[i]) {
      chosen[i] = e;
      each_combo(sets, count, chosen, i + 1, sink);
    }
  }

  ExtSet body_eval(const ExtEnv& env, const ExprPtr& t) {
    const TypedProgram& tp = *cx_.norm;
    ExtSet result;
    switch (t->kind) {
      case Expr::Kind::Var:
        result.insert(env.at(t->name));
        break;
      case Expr::Kind::Fun: {
        size_t ar = arity_of(tp, t->name);
        if (ar == 0) {
          ExtSet copy = demand(t->name, {});
          for (const auto& v : copy) antichain_add(result, v);
        } else {
          antichain_add(result, build_partial(t->name, {}));
        }
        break;
      }
      case Expr::Kind::Ctor: {
        std::vector<ExtSet> parts;
        for (const auto& part : t->parts) parts.push_back(body_eval(env, part));
        std::vector<ExtValuePtr> chosen(parts.size());
        each_combo(parts, parts.size(), chosen, 0, [&]() {
          std::vector<ValuePtr> vals;
          for (const auto& e : chosen) {
            ValuePtr v = ext_to_value(e);
            if (!v) return;
            vals.push_back(std::move(v));
          }
          ValuePtr built = data_value(t->name, std::move(vals));
          if (cx_.universe_b.count(built))
            antichain_add(result, ext_data(std::move(built)));
        });
        break;
      }
      case Expr::Kind::If: {
        ExtSet cond = body_eval(env, t->parts[0]);
        auto has = [&](const ExtValuePtr& b) {
          for (const auto& m : cond)
            if (ext_geq(m, b)) return true;
          return false;
        };
        if (has(ext_true()))
          for (const auto& v : body_eval(env, t->parts[1]))
            antichain_add(result, v);
        if (has(ext_false()))
          for (const auto& v : body_eval(env, t->parts[2]))
            antichain_add(result, v);
        break;
      }
      case Expr::Kind::Choose: {
        for (const auto& alt : t->parts)
          for (const auto& v : body_eval(env, alt)) antichain_add(result, v);
        break;
      }
      case Expr::Kind::Pair: {
        ExtSet ls = body_eval(env, t->parts[0]);
        ExtSet rs = body_eval(env, t->parts[1]);
        for (const auto& l : ls)
          for (const auto& r : rs) antichain_add(result, ext_pair(l, r));
        break;
      }
      case Expr::Kind::Apply: {
        std::vector<ExprPtr> args;
        ExprPtr head = spine_head(t, args);
        std::vector<ExtSet> argsets;
        for (const auto& arg : args) argsets.push_back(body_eval(env, arg));
        if (head->kind == Expr::Kind::Var) {
          ExtSet applied =
              apply_down(ExtSet{env.at(head->name)}, argsets, 0);
          for (const auto& v : applied) antichain_add(result, v);
          break;
        }
        assert(head->kind == Expr::Kind::Fun);
        size_t k = arity_of(tp, head->name);
        std::vector<ExtValuePtr> chosen(args.size());
        size_t direct = std::min(args.size(), k);
        each_combo(argsets, direct, chosen, 0, [&]() {
          std::vector<ExtValuePtr> first(chosen.begin(),
                                         chosen.begin() + direct);
          if (args.size() < k) {
            antichain_add(result, build_partial(head->name, first));
          } else if (args.size() == k) {
            ExtSet copy = demand(head->name, first);
            for (const auto& v : copy) antichain_add(result, v);
          } else {
            ExtSet base = demand(head->name, first);
            for (const auto& v : apply_down(base, argsets, k))
              antichain_add(result, v);
          }
        });
        break;
      }
    }
    return result;
  }
};

}  // namespace

ValueSet tabulate(const TypedProgram& tp, const std::vector<ValuePtr>& inputs,
                  ExtMode mode, TabMetric metric, int k,
                  const TabulateOptions& options) {
  ConsFreeReport cf = check_cons_free(tp);
  if (!cf.cons_free) {
    std::string detail;
    if (!cf.offenders.empty())
      detail = ": " + cf.offenders.front().subexpr + " " +
               cf.offenders.front().reason;
    throw ExtensionalError("tabulation requires a program that builds no data" +
                           detail);
  }
  if (mode == ExtMode::Deterministic && !analyze(tp).deterministic)
    throw ExtensionalError(
        "deterministic tabulation requires a choice-free program");
  if (inputs.size() != tp.main_arg_types.size())
    throw TypeError("expected " + std::to_string(tp.main_arg_types.size()) +
                        " inputs, got " + std::to_string(inputs.size()),
                    -1);
  for (size_t i = 0; i < inputs.size(); ++i)
    if (!data_has_type(tp.program, inputs[i], tp.main_arg_types[i]))
      throw TypeError("input " + std::to_string(i + 1) + " is not a data " +
                          "value of type " +
                          pretty_print(tp.main_arg_types[i]),
                      -1);

  Properness props;
  props.mode = metric == TabMetric::Order ? Properness::Mode::OrderAtMost
                                          : Properness::Mode::DepthAtMost;
  props.k = k;

  TabContext cx;
  cx.props = props;
  cx.mode = mode;
  cx.opts = options;
  TypedProgram norm = normalize(tp, props);
  cx.norm = &norm;
  // The bounded universe of the source program; normalization only ever
  // removes ground data from bodies, so this is the larger, safe choice.
  cx.universe_b = compute_B(tp.program, inputs);
  cx.build_subexpr_types();

  std::vector<ExtValuePtr> root_args;
  for (const auto& d : inputs) root_args.push_back(value_to_ext(d));

  if (options.engine == TabEngine::Naive) return NaiveEngine(cx).run(root_args);
  return DemandEngine(cx).run(root_args);
}

mpz_class cardinality_bound(const TypePtr& t, unsigned long n,
                            TabMetric metric) {
  int k = metric == TabMetric::Order ? type_order(t) : type_arrow_depth(t);
  int l = type_length(t);
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), n, static_cast<unsigned long>(l));
  for (int i = 0; i < k; ++i) {
    if (!r.fits_ulong_p())
      throw ExtensionalError("cardinality bound is too large to represent");
    mpz_class next = 1;
    mpz_mul_2exp(next.get_mpz_t(), next.get_mpz_t(), r.get_ui());
    r = std::move(next);
  }
  return r;
}

}  // namespace consfree
