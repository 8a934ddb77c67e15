#include "consfree/eval.hpp"

#include <functional>

namespace consfree {

// ---------------------------------------------------------------------------
// Pattern matching.
// ---------------------------------------------------------------------------

namespace {

bool match_into(const PatternPtr& l, const ValuePtr& v, Env& env) {
  switch (l->kind) {
    case Pattern::Kind::Var:
      env[l->name] = v;  // linearity guarantees no clash
      return true;
    case Pattern::Kind::Pair:
      return v->kind == Value::Kind::Pair &&
             match_into(l->parts[0], v->parts[0], env) &&
             match_into(l->parts[1], v->parts[1], env);
    case Pattern::Kind::Ctor: {
      if (v->kind != Value::Kind::Data || v->name != l->name) return false;
      for (size_t i = 0; i < l->parts.size(); ++i)
        if (!match_into(l->parts[i], v->parts[i], env)) return false;
      return true;
    }
  }
  return false;
}

}  // namespace

std::optional<Env> match_pattern(const PatternPtr& l, const ValuePtr& v) {
  Env env;
  if (match_into(l, v, env)) return env;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// The bounded data universe.
// ---------------------------------------------------------------------------

namespace {

// Adds every constructor term inside v (descending through pairs); pair
// nodes themselves are not constructor terms and are skipped.
void add_data_terms(const ValuePtr& v, ValueSet& out) {
  switch (v->kind) {
    case Value::Kind::Data:
      out.insert(v);
      for (auto& a : v->parts) add_data_terms(a, out);
      return;
    case Value::Kind::Pair:
      add_data_terms(v->parts[0], out);
      add_data_terms(v->parts[1], out);
      return;
    case Value::Kind::Closure:
      for (auto& a : v->parts) add_data_terms(a, out);
      return;
  }
}

}  // namespace

ValueSet compute_B(const Program& p, const std::vector<ValuePtr>& inputs) {
  ValueSet out;
  for (auto& v : inputs) add_data_terms(v, out);
  for (auto& c : p.clauses) {
    for (auto& t : subexpressions(c.body)) {
      if (t->kind != Expr::Kind::Ctor) continue;
      if (ValuePtr d = expr_to_data(t)) add_data_terms(d, out);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation.
// ---------------------------------------------------------------------------

namespace {

class Evaluator {
 public:
  Evaluator(const TypedProgram& tp, ValueSet* trace)
      : tp_(tp), trace_(trace) {}

  bool exhausted() const { return exhausted_; }

  ValueSet eval(const ExprPtr& e, const Env& env, std::uint64_t fuel) {
    if (fuel == 0) {
      exhausted_ = false;
      return {};
    }
    switch (e->kind) {
      case Expr::Kind::Var:
        return single(env.at(e->name));
      case Expr::Kind::Fun: {
        size_t arity = arity_of(e->name);
        if (arity == 0) return call(e->name, {}, fuel - 1);
        return single(closure_value(e->name, {}));
      }
      case Expr::Kind::Ctor: {
        ValueSet out;
        combine(e->parts, env, fuel - 1, 0, {},
                [&](const std::vector<ValuePtr>& args) {
                  out.insert(record(data_value(e->name, args)));
                });
        return out;
      }
      case Expr::Kind::Pair: {
        ValueSet out;
        combine(e->parts, env, fuel - 1, 0, {},
                [&](const std::vector<ValuePtr>& args) {
                  out.insert(record(pair_value(args[0], args[1])));
                });
        return out;
      }
      case Expr::Kind::Choose: {
        ValueSet out;
        for (auto& alt : e->parts) {
          ValueSet vs = eval(alt, env, fuel - 1);
          out.insert(vs.begin(), vs.end());
        }
        return out;
      }
      case Expr::Kind::If: {
        ValueSet out;
        for (auto& c : eval(e->parts[0], env, fuel - 1)) {
          if (c->kind != Value::Kind::Data) continue;
          const ExprPtr& branch =
              c->name == "true" ? e->parts[1] : e->parts[2];
          ValueSet vs = eval(branch, env, fuel - 1);
          out.insert(vs.begin(), vs.end());
        }
        return out;
      }
      case Expr::Kind::Apply: {
        ValueSet out;
        for (auto& head : eval(e->parts[0], env, fuel - 1)) {
          if (head->kind != Value::Kind::Closure)
            throw std::logic_error("application of a non-closure value");
          for (auto& arg : eval(e->parts[1], env, fuel - 1)) {
            ValueSet vs = apply_value(head, arg, fuel - 1);
            out.insert(vs.begin(), vs.end());
          }
        }
        return out;
      }
    }
    return {};
  }

  // Extends a closure by one argument: either a bigger closure or, at full
  // arity, a call.
  ValueSet apply_value(const ValuePtr& closure, const ValuePtr& arg,
                       std::uint64_t fuel) {
    std::vector<ValuePtr> args = closure->parts;
    args.push_back(arg);
    if (args.size() < arity_of(closure->name))
      return single(closure_value(closure->name, std::move(args)));
    return call(closure->name, args, fuel);
  }

  // The call judgment: commits to the first clause whose left-hand side
  // matches; no matching clause means no values.
  ValueSet call(const std::string& fun, const std::vector<ValuePtr>& args,
                std::uint64_t fuel) {
    if (fuel == 0) {
      exhausted_ = false;
      return {};
    }
    for (auto& v : args) record(v);
    for (auto& c : tp_.program.clauses) {
      if (c.root != fun || c.patterns.size() != args.size()) continue;
      Env env;
      bool ok = true;
      for (size_t i = 0; i < args.size() && ok; ++i)
        ok = match_into(c.patterns[i], args[i], env);
      if (!ok) continue;
      ValueSet out = eval(c.body, env, fuel - 1);
      for (auto& v : out) record(v);
      return out;
    }
    return {};
  }

  size_t arity_of(const std::string& fun) const {
    auto it = tp_.arities.find(fun);
    // A declared symbol without clauses never reaches a call; treat its
    // arity as the full arrow count of its signature.
    if (it != tp_.arities.end()) return it->second;
    size_t n = 0;
    for (TypePtr t = *tp_.program.fun_sig(fun); t->kind == Type::Kind::Arrow;
         t = t->right)
      ++n;
    return n;
  }

 private:
  ValueSet single(ValuePtr v) { return {record(std::move(v))}; }

  ValuePtr record(ValuePtr v) {
    if (trace_) trace_->insert(v);
    return v;
  }

  // Enumerates all combinations of values of the given argument
  // expressions (depth-first, left to right).
  void combine(const std::vector<ExprPtr>& parts, const Env& env,
               std::uint64_t fuel, size_t index, std::vector<ValuePtr> acc,
               const std::function<void(const std::vector<ValuePtr>&)>& emit) {
    if (index == parts.size()) {
      emit(acc);
      return;
    }
    for (auto& v : eval(parts[index], env, fuel)) {
      acc.push_back(v);
      combine(parts, env, fuel, index + 1, acc, emit);
      acc.pop_back();
    }
  }

  const TypedProgram& tp_;
  ValueSet* trace_;
  bool exhausted_ = true;
};

}  // namespace

EvalOutcome eval_call(const TypedProgram& tp, const std::string& fun,
                      const std::vector<ValuePtr>& args, std::uint64_t fuel,
                      ValueSet* trace) {
  Evaluator ev(tp, trace);
  size_t arity = ev.arity_of(fun);
  EvalOutcome out;
  if (args.size() <= arity) {
    if (args.size() < arity) {
      out.values = {closure_value(fun, args)};
    } else {
      out.values = ev.call(fun, args, fuel);
    }
    out.exhausted = ev.exhausted();
    return out;
  }
  // Over-application: call at arity, then extend the resulting closures.
  std::vector<ValuePtr> first(args.begin(), args.begin() + arity);
  ValueSet heads = ev.call(fun, first, fuel);
  for (size_t i = arity; i < args.size(); ++i) {
    ValueSet next;
    for (auto& h : heads) {
      if (h->kind != Value::Kind::Closure)
        throw std::logic_error("application of a non-closure value");
      ValueSet vs = ev.apply_value(h, args[i], fuel);
      next.insert(vs.begin(), vs.end());
    }
    heads = std::move(next);
  }
  out.values = std::move(heads);
  out.exhausted = ev.exhausted();
  return out;
}

bool data_has_type(const Program& p, const ValuePtr& v, const TypePtr& t) {
  switch (v->kind) {
    case Value::Kind::Data: {
      auto it = p.ctors.find(v->name);
      if (it == p.ctors.end()) return false;
      if (t->kind != Type::Kind::Sort || t->name != it->second.sort)
        return false;
      if (v->parts.size() != it->second.arg_types.size()) return false;
      for (size_t i = 0; i < v->parts.size(); ++i)
        if (!data_has_type(p, v->parts[i], it->second.arg_types[i]))
          return false;
      return true;
    }
    case Value::Kind::Pair:
      return t->kind == Type::Kind::Pair &&
             data_has_type(p, v->parts[0], t->left) &&
             data_has_type(p, v->parts[1], t->right);
    case Value::Kind::Closure:
      return false;
  }
  return false;
}

EvalOutcome eval_all(const TypedProgram& tp,
                     const std::vector<ValuePtr>& inputs, std::uint64_t fuel,
                     ValueSet* trace) {
  if (inputs.size() != tp.main_arg_types.size())
    throw TypeError("main function " + tp.main_fun + " expects " +
                        std::to_string(tp.main_arg_types.size()) +
                        " input(s), got " + std::to_string(inputs.size()),
                    -1);
  for (size_t i = 0; i < inputs.size(); ++i)
    if (!data_has_type(tp.program, inputs[i], tp.main_arg_types[i]))
      throw TypeError("input " + std::to_string(i + 1) + " (" +
                          pretty_print(inputs[i]) + ") does not have type " +
                          pretty_print(tp.main_arg_types[i]),
                      -1);
  return eval_call(tp, tp.main_fun, inputs, fuel, trace);
}

bool check_safety(const Program& p, const std::vector<ValuePtr>& inputs,
                  const ValueSet& trace) {
  ValueSet b = compute_B(p, inputs);
  ValueSet seen;
  for (auto& v : trace) add_data_terms(v, seen);
  for (auto& d : seen)
    if (!b.count(d)) return false;
  return true;
}

}  // namespace consfree
