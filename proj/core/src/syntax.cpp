#include "consfree/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace consfree {

// ---------------------------------------------------------------------------
// Factories and comparisons.
// ---------------------------------------------------------------------------

TypePtr sort_type(std::string name) {
  auto t = std::make_shared<Type>();
  t->kind = Type::Kind::Sort;
  t->name = std::move(name);
  return t;
}

TypePtr pair_type(TypePtr left, TypePtr right) {
  auto t = std::make_shared<Type>();
  t->kind = Type::Kind::Pair;
  t->left = std::move(left);
  t->right = std::move(right);
  return t;
}

TypePtr arrow_type(TypePtr from, TypePtr to) {
  auto t = std::make_shared<Type>();
  t->kind = Type::Kind::Arrow;
  t->left = std::move(from);
  t->right = std::move(to);
  return t;
}

int type_compare(const TypePtr& a, const TypePtr& b) {
  if (a.get() == b.get()) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  if (a->kind == Type::Kind::Sort) return a->name.compare(b->name);
  if (int c = type_compare(a->left, b->left)) return c;
  return type_compare(a->right, b->right);
}

bool type_equal(const TypePtr& a, const TypePtr& b) {
  return type_compare(a, b) == 0;
}

static ExprPtr make_expr(Expr::Kind kind, std::string name,
                         std::vector<ExprPtr> parts) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->name = std::move(name);
  e->parts = std::move(parts);
  return e;
}

ExprPtr var_expr(std::string name) {
  return make_expr(Expr::Kind::Var, std::move(name), {});
}
ExprPtr ctor_expr(std::string name, std::vector<ExprPtr> args) {
  return make_expr(Expr::Kind::Ctor, std::move(name), std::move(args));
}
ExprPtr fun_expr(std::string name) {
  return make_expr(Expr::Kind::Fun, std::move(name), {});
}
ExprPtr if_expr(ExprPtr cond, ExprPtr then_branch, ExprPtr else_branch) {
  return make_expr(Expr::Kind::If, "",
                   {std::move(cond), std::move(then_branch),
                    std::move(else_branch)});
}
ExprPtr choose_expr(std::vector<ExprPtr> alternatives) {
  return make_expr(Expr::Kind::Choose, "", std::move(alternatives));
}
ExprPtr pair_expr(ExprPtr left, ExprPtr right) {
  return make_expr(Expr::Kind::Pair, "", {std::move(left), std::move(right)});
}
ExprPtr apply_expr(ExprPtr head, ExprPtr arg) {
  return make_expr(Expr::Kind::Apply, "", {std::move(head), std::move(arg)});
}

int expr_compare(const ExprPtr& a, const ExprPtr& b) {
  if (a.get() == b.get()) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  if (int c = a->name.compare(b->name)) return c < 0 ? -1 : 1;
  if (a->parts.size() != b->parts.size())
    return a->parts.size() < b->parts.size() ? -1 : 1;
  for (size_t i = 0; i < a->parts.size(); ++i)
    if (int c = expr_compare(a->parts[i], b->parts[i])) return c;
  return 0;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  return expr_compare(a, b) == 0;
}

PatternPtr var_pattern(std::string name) {
  auto p = std::make_shared<Pattern>();
  p->kind = Pattern::Kind::Var;
  p->name = std::move(name);
  return p;
}
PatternPtr pair_pattern(PatternPtr left, PatternPtr right) {
  auto p = std::make_shared<Pattern>();
  p->kind = Pattern::Kind::Pair;
  p->parts = {std::move(left), std::move(right)};
  return p;
}
PatternPtr ctor_pattern(std::string name, std::vector<PatternPtr> args) {
  auto p = std::make_shared<Pattern>();
  p->kind = Pattern::Kind::Ctor;
  p->name = std::move(name);
  p->parts = std::move(args);
  return p;
}

int pattern_compare(const PatternPtr& a, const PatternPtr& b) {
  if (a.get() == b.get()) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  if (int c = a->name.compare(b->name)) return c < 0 ? -1 : 1;
  if (a->parts.size() != b->parts.size())
    return a->parts.size() < b->parts.size() ? -1 : 1;
  for (size_t i = 0; i < a->parts.size(); ++i)
    if (int c = pattern_compare(a->parts[i], b->parts[i])) return c;
  return 0;
}

bool pattern_equal(const PatternPtr& a, const PatternPtr& b) {
  return pattern_compare(a, b) == 0;
}

ExprPtr pattern_to_expr(const PatternPtr& p) {
  switch (p->kind) {
    case Pattern::Kind::Var:
      return var_expr(p->name);
    case Pattern::Kind::Pair:
      return pair_expr(pattern_to_expr(p->parts[0]),
                       pattern_to_expr(p->parts[1]));
    case Pattern::Kind::Ctor: {
      std::vector<ExprPtr> args;
      for (auto& q : p->parts) args.push_back(pattern_to_expr(q));
      return ctor_expr(p->name, std::move(args));
    }
  }
  return nullptr;
}

bool clause_equal(const Clause& a, const Clause& b) {
  if (a.root != b.root || a.patterns.size() != b.patterns.size()) return false;
  for (size_t i = 0; i < a.patterns.size(); ++i)
    if (!pattern_equal(a.patterns[i], b.patterns[i])) return false;
  return expr_equal(a.body, b.body);
}

ValuePtr data_value(std::string ctor, std::vector<ValuePtr> args) {
  auto v = std::make_shared<Value>();
  v->kind = Value::Kind::Data;
  v->name = std::move(ctor);
  v->parts = std::move(args);
  return v;
}
ValuePtr pair_value(ValuePtr left, ValuePtr right) {
  auto v = std::make_shared<Value>();
  v->kind = Value::Kind::Pair;
  v->parts = {std::move(left), std::move(right)};
  return v;
}
ValuePtr closure_value(std::string fun, std::vector<ValuePtr> args) {
  auto v = std::make_shared<Value>();
  v->kind = Value::Kind::Closure;
  v->name = std::move(fun);
  v->parts = std::move(args);
  return v;
}

int value_compare(const ValuePtr& a, const ValuePtr& b) {
  if (a.get() == b.get()) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  if (int c = a->name.compare(b->name)) return c < 0 ? -1 : 1;
  if (a->parts.size() != b->parts.size())
    return a->parts.size() < b->parts.size() ? -1 : 1;
  for (size_t i = 0; i < a->parts.size(); ++i)
    if (int c = value_compare(a->parts[i], b->parts[i])) return c;
  return 0;
}

bool value_equal(const ValuePtr& a, const ValuePtr& b) {
  return value_compare(a, b) == 0;
}

// ---------------------------------------------------------------------------
// Program finalization.
// ---------------------------------------------------------------------------

void Program::finalize() {
  ctors.clear();
  sorts.clear();
  fun_sig_map.clear();

  sorts.insert("bool");
  sorts.insert("list");
  ctors["true"] = {"bool", {}};
  ctors["false"] = {"bool", {}};
  ctors["nil"] = {"list", {}};
  ctors["cons"] = {"list", {sort_type("bool"), sort_type("list")}};

  for (auto& [sort, cdecls] : data_decls) {
    if (!sorts.insert(sort).second)
      throw ParseError("duplicate sort declaration: " + sort, 0, 0);
    for (auto& c : cdecls) {
      if (ctors.count(c.name))
        throw ParseError("duplicate constructor declaration: " + c.name, 0, 0);
      ctors[c.name] = {sort, c.arg_types};
    }
  }
  for (auto& [name, sig] : fun_sigs) {
    if (ctors.count(name))
      throw ParseError(
          "identifier declared both as constructor and function: " + name, 0,
          0);
    if (!fun_sig_map.emplace(name, sig).second)
      throw ParseError("duplicate signature for: " + name, 0, 0);
  }
}

const TypePtr* Program::fun_sig(const std::string& name) const {
  auto it = fun_sig_map.find(name);
  return it == fun_sig_map.end() ? nullptr : &it->second;
}

bool program_equal(const Program& a, const Program& b) {
  if (a.data_decls.size() != b.data_decls.size() ||
      a.fun_sigs.size() != b.fun_sigs.size() ||
      a.clauses.size() != b.clauses.size())
    return false;
  for (size_t i = 0; i < a.data_decls.size(); ++i) {
    if (a.data_decls[i].first != b.data_decls[i].first) return false;
    auto& ca = a.data_decls[i].second;
    auto& cb = b.data_decls[i].second;
    if (ca.size() != cb.size()) return false;
    for (size_t j = 0; j < ca.size(); ++j) {
      if (ca[j].name != cb[j].name ||
          ca[j].arg_types.size() != cb[j].arg_types.size())
        return false;
      for (size_t k = 0; k < ca[j].arg_types.size(); ++k)
        if (!type_equal(ca[j].arg_types[k], cb[j].arg_types[k])) return false;
    }
  }
  for (size_t i = 0; i < a.fun_sigs.size(); ++i) {
    if (a.fun_sigs[i].first != b.fun_sigs[i].first ||
        !type_equal(a.fun_sigs[i].second, b.fun_sigs[i].second))
      return false;
  }
  for (size_t i = 0; i < a.clauses.size(); ++i)
    if (!clause_equal(a.clauses[i], b.clauses[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Lexer.
// ---------------------------------------------------------------------------

ParseError::ParseError(std::string message, int line, int column)
    : std::runtime_error(message + " (line " + std::to_string(line) +
                         ", column " + std::to_string(column) + ")"),
      line_(line),
      column_(column) {}

namespace {

enum class Tok {
  Ident,     // lowercase identifier or keyword
  Equals,    // =
  Colon,     // :
  ConsOp,    // ::
  ArrowOp,   // =>
  Star,      // *
  LParen,    // (
  RParen,    // )
  Comma,     // ,
  Pipe,      // |
  NilLit,    // []
  Newline,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto push = [&](Tok k, std::string t, int l, int c) {
    out.push_back({k, std::move(t), l, c});
  };
  while (i < text.size()) {
    char c = text[i];
    int l = line, co = col;
    auto advance = [&](size_t n) {
      for (size_t k = 0; k < n; ++k) {
        if (text[i] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
        ++i;
      }
    };
    if (c == '\n') {
      push(Tok::Newline, "\n", l, co);
      advance(1);
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (std::islower(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::islower(static_cast<unsigned char>(text[j])) ||
              std::isdigit(static_cast<unsigned char>(text[j])) ||
              text[j] == '_'))
        ++j;
      std::string word = text.substr(i, j - i);
      advance(j - i);
      push(Tok::Ident, word, l, co);
      continue;
    }
    if (c == ':' && i + 1 < text.size() && text[i + 1] == ':') {
      advance(2);
      push(Tok::ConsOp, "::", l, co);
      continue;
    }
    if (c == '=' && i + 1 < text.size() && text[i + 1] == '>') {
      advance(2);
      push(Tok::ArrowOp, "=>", l, co);
      continue;
    }
    if (c == '[' && i + 1 < text.size() && text[i + 1] == ']') {
      advance(2);
      push(Tok::NilLit, "[]", l, co);
      continue;
    }
    switch (c) {
      case '=':
        advance(1);
        push(Tok::Equals, "=", l, co);
        continue;
      case ':':
        advance(1);
        push(Tok::Colon, ":", l, co);
        continue;
      case '*':
        advance(1);
        push(Tok::Star, "*", l, co);
        continue;
      case '(':
        advance(1);
        push(Tok::LParen, "(", l, co);
        continue;
      case ')':
        advance(1);
        push(Tok::RParen, ")", l, co);
        continue;
      case ',':
        advance(1);
        push(Tok::Comma, ",", l, co);
        continue;
      case '|':
        advance(1);
        push(Tok::Pipe, "|", l, co);
        continue;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", l,
                         co);
    }
  }
  push(Tok::End, "", line, col);
  return out;
}

bool is_keyword(const std::string& w) {
  return w == "data" || w == "if" || w == "then" || w == "else" ||
         w == "choose";
}

// Groups tokens into logical items.  An item ends at a newline outside
// parentheses, except that a following line starting with `|` continues a
// data declaration.
std::vector<std::vector<Token>> split_items(const std::vector<Token>& toks) {
  std::vector<std::vector<Token>> items;
  std::vector<Token> cur;
  int depth = 0;
  for (size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind == Tok::End) break;
    if (t.kind == Tok::Newline) {
      if (depth > 0) continue;
      // Peek at the next significant token; `|` continues the current item.
      size_t j = i + 1;
      while (j < toks.size() && toks[j].kind == Tok::Newline) ++j;
      if (!cur.empty() && j < toks.size() && toks[j].kind == Tok::Pipe)
        continue;
      if (!cur.empty()) items.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    if (t.kind == Tok::LParen) ++depth;
    if (t.kind == Tok::RParen) --depth;
    cur.push_back(t);
  }
  if (!cur.empty()) items.push_back(std::move(cur));
  return items;
}

// Token cursor over one item.
class Cursor {
 public:
  explicit Cursor(const std::vector<Token>& toks) : toks_(toks) {}

  const Token& peek(size_t ahead = 0) const {
    size_t i = pos_ + ahead;
    if (i < toks_.size()) return toks_[i];
    return end_;
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size()) ++pos_;
    return t;
  }
  bool at_end() const { return pos_ >= toks_.size(); }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    int line = t.kind == Tok::End && !toks_.empty() ? toks_.back().line : t.line;
    int col =
        t.kind == Tok::End && !toks_.empty() ? toks_.back().column : t.column;
    throw ParseError(msg, line, col);
  }
  void expect(Tok k, const std::string& what) {
    if (peek().kind != k) fail("expected " + what);
    next();
  }

 private:
  const std::vector<Token>& toks_;
  size_t pos_ = 0;
  Token end_{Tok::End, "", 0, 0};
};

// ---------------------------------------------------------------------------
// Type parser:  atype := ident | '(' type ')';  ptype := atype ['*' ptype];
// type := ptype ['=>' type].
// ---------------------------------------------------------------------------

class TypeParser {
 public:
  TypeParser(Cursor& cur, const std::set<std::string>& sorts)
      : cur_(cur), sorts_(sorts) {}

  TypePtr type() {
    TypePtr left = ptype();
    if (cur_.peek().kind == Tok::ArrowOp) {
      cur_.next();
      return arrow_type(left, type());
    }
    return left;
  }

 private:
  TypePtr ptype() {
    TypePtr left = atype();
    if (cur_.peek().kind == Tok::Star) {
      cur_.next();
      return pair_type(left, ptype());
    }
    return left;
  }
  TypePtr atype() {
    const Token& t = cur_.peek();
    if (t.kind == Tok::Ident && !is_keyword(t.text)) {
      if (!sorts_.count(t.text)) cur_.fail("unknown sort: " + t.text);
      cur_.next();
      return sort_type(t.text);
    }
    if (t.kind == Tok::LParen) {
      cur_.next();
      TypePtr inner = type();
      cur_.expect(Tok::RParen, "')'");
      return inner;
    }
    cur_.fail("expected a type");
  }

  Cursor& cur_;
  const std::set<std::string>& sorts_;
};

// ---------------------------------------------------------------------------
// Expression / pattern parser, relative to the sets of declared constructor
// and defined-symbol names.
// ---------------------------------------------------------------------------

class ExprParser {
 public:
  ExprParser(Cursor& cur, const Program& prog) : cur_(cur), prog_(prog) {}

  // expr := 'if' expr 'then' expr 'else' expr | cons_expr
  ExprPtr expr() {
    const Token& t = cur_.peek();
    if (t.kind == Tok::Ident && t.text == "if") {
      cur_.next();
      ExprPtr cond = expr();
      if (!(cur_.peek().kind == Tok::Ident && cur_.peek().text == "then"))
        cur_.fail("expected 'then'");
      cur_.next();
      ExprPtr thn = expr();
      if (!(cur_.peek().kind == Tok::Ident && cur_.peek().text == "else"))
        cur_.fail("expected 'else'");
      cur_.next();
      ExprPtr els = expr();
      return if_expr(cond, thn, els);
    }
    return cons_expr();
  }

  // pattern := pcons;  pcons := papp ['::' pcons]
  PatternPtr pattern() {
    PatternPtr left = pattern_app();
    if (cur_.peek().kind == Tok::ConsOp) {
      cur_.next();
      return ctor_pattern("cons", {left, pattern()});
    }
    return left;
  }

  // A single clause argument: an atomic pattern.
  PatternPtr pattern_atom() {
    const Token& t = cur_.peek();
    if (t.kind == Tok::NilLit) {
      cur_.next();
      return ctor_pattern("nil", {});
    }
    if (t.kind == Tok::LParen) {
      cur_.next();
      std::vector<PatternPtr> elems;
      elems.push_back(pattern());
      while (cur_.peek().kind == Tok::Comma) {
        cur_.next();
        elems.push_back(pattern());
      }
      cur_.expect(Tok::RParen, "')'");
      PatternPtr out = elems.back();
      for (size_t i = elems.size() - 1; i-- > 0;)
        out = pair_pattern(elems[i], out);
      return out;
    }
    if (t.kind == Tok::Ident && !is_keyword(t.text)) {
      cur_.next();
      if (prog_.is_ctor(t.text)) {
        size_t arity = prog_.ctors.at(t.text).arg_types.size();
        if (arity != 0)
          throw ParseError("constructor " + t.text +
                               " must be fully applied; add parentheses",
                           t.line, t.column);
        return ctor_pattern(t.text, {});
      }
      if (prog_.is_fun(t.text))
        throw ParseError("defined symbol " + t.text + " used in a pattern",
                         t.line, t.column);
      return var_pattern(t.text);
    }
    cur_.fail("expected a pattern");
  }

 private:
  // papp := ctor pattern_atom*  (constructor with arguments) | pattern_atom
  PatternPtr pattern_app() {
    const Token& t = cur_.peek();
    if (t.kind == Tok::Ident && !is_keyword(t.text) && prog_.is_ctor(t.text)) {
      size_t arity = prog_.ctors.at(t.text).arg_types.size();
      if (arity > 0) {
        cur_.next();
        std::vector<PatternPtr> args;
        for (size_t i = 0; i < arity; ++i) args.push_back(pattern_atom());
        return ctor_pattern(t.text, std::move(args));
      }
    }
    return pattern_atom();
  }

  // cons_expr := app_expr ['::' cons_expr]
  ExprPtr cons_expr() {
    ExprPtr left = app_expr();
    if (cur_.peek().kind == Tok::ConsOp) {
      cur_.next();
      return ctor_expr("cons", {left, cons_expr()});
    }
    return left;
  }

  bool starts_atom() const {
    const Token& t = cur_.peek();
    if (t.kind == Tok::NilLit || t.kind == Tok::LParen) return true;
    if (t.kind != Tok::Ident) return false;
    return !is_keyword(t.text) || t.text == "choose";
  }

  // app_expr := atom+, folding left-associatively; a constructor head
  // consumes exactly its declared arity.
  ExprPtr app_expr() {
    ExprPtr head = atom();
    while (starts_atom()) head = apply_expr(head, atom());
    return head;
  }

  ExprPtr atom() {
    const Token& t = cur_.peek();
    if (t.kind == Tok::NilLit) {
      cur_.next();
      return ctor_expr("nil", {});
    }
    if (t.kind == Tok::LParen) {
      cur_.next();
      std::vector<ExprPtr> elems;
      elems.push_back(expr());
      while (cur_.peek().kind == Tok::Comma) {
        cur_.next();
        elems.push_back(expr());
      }
      cur_.expect(Tok::RParen, "')'");
      ExprPtr out = elems.back();
      for (size_t i = elems.size() - 1; i-- > 0;)
        out = pair_expr(elems[i], out);
      return out;
    }
    if (t.kind == Tok::Ident && t.text == "choose") {
      cur_.next();
      cur_.expect(Tok::LParen, "'(' after choose");
      std::vector<ExprPtr> alts;
      alts.push_back(expr());
      while (cur_.peek().kind == Tok::Comma) {
        cur_.next();
        alts.push_back(expr());
      }
      cur_.expect(Tok::RParen, "')'");
      return choose_expr(std::move(alts));
    }
    if (t.kind == Tok::Ident && !is_keyword(t.text)) {
      cur_.next();
      if (prog_.is_ctor(t.text)) {
        size_t arity = prog_.ctors.at(t.text).arg_types.size();
        std::vector<ExprPtr> args;
        for (size_t i = 0; i < arity; ++i) {
          if (!starts_atom())
            throw ParseError("constructor " + t.text + " expects " +
                                 std::to_string(arity) + " argument(s)",
                             t.line, t.column);
          args.push_back(atom());
        }
        return ctor_expr(t.text, std::move(args));
      }
      if (prog_.is_fun(t.text)) return fun_expr(t.text);
      return var_expr(t.text);
    }
    cur_.fail("expected an expression");
  }

  Cursor& cur_;
  const Program& prog_;
};

enum class ItemKind { Data, Sig, Clause };

ItemKind classify(const std::vector<Token>& item) {
  if (!item.empty() && item[0].kind == Tok::Ident && item[0].text == "data")
    return ItemKind::Data;
  if (item.size() >= 2 && item[1].kind == Tok::Colon) return ItemKind::Sig;
  return ItemKind::Clause;
}

std::string expect_name(Cursor& cur, const std::string& what) {
  const Token& t = cur.peek();
  if (t.kind != Tok::Ident || is_keyword(t.text))
    cur.fail("expected " + what);
  cur.next();
  return t.text;
}

}  // namespace

// ---------------------------------------------------------------------------
// parse_program
// ---------------------------------------------------------------------------

Program parse_program(const std::string& text) {
  std::vector<Token> toks = lex(text);
  std::vector<std::vector<Token>> items = split_items(toks);

  Program prog;

  // First pass: data declarations and signature/clause roots, so that
  // identifier categories are known before bodies are parsed.  Sorts must be
  // collected before signatures can be parsed, so data declarations are
  // processed first, then signatures, then clause bodies.
  std::set<std::string> pre_sorts = {"bool", "list"};
  for (auto& item : items) {
    if (classify(item) != ItemKind::Data) continue;
    Cursor cur(item);
    cur.next();  // 'data'
    std::string sort = expect_name(cur, "a sort name");
    pre_sorts.insert(sort);
  }
  for (auto& item : items) {
    if (classify(item) != ItemKind::Data) continue;
    Cursor cur(item);
    cur.next();  // 'data'
    std::string sort = expect_name(cur, "a sort name");
    cur.expect(Tok::Equals, "'='");
    std::vector<CtorSig> cdecls;
    while (true) {
      std::string cname = expect_name(cur, "a constructor name");
      CtorSig sig{cname, {}};
      while (!cur.at_end() && cur.peek().kind != Tok::Pipe) {
        TypeParser tp(cur, pre_sorts);
        // Constructor argument types are atomic or parenthesised; parse one
        // full type only inside parentheses to keep juxtaposition unambiguous.
        const Token& t = cur.peek();
        if (t.kind == Tok::Ident) {
          if (!pre_sorts.count(t.text)) cur.fail("unknown sort: " + t.text);
          cur.next();
          sig.arg_types.push_back(sort_type(t.text));
        } else if (t.kind == Tok::LParen) {
          cur.next();
          sig.arg_types.push_back(tp.type());
          cur.expect(Tok::RParen, "')'");
        } else {
          cur.fail("expected a constructor argument type");
        }
      }
      cdecls.push_back(std::move(sig));
      if (cur.at_end()) break;
      cur.expect(Tok::Pipe, "'|'");
    }
    prog.data_decls.emplace_back(sort, std::move(cdecls));
  }

  for (auto& item : items) {
    if (classify(item) != ItemKind::Sig) continue;
    Cursor cur(item);
    std::string name = expect_name(cur, "a function name");
    cur.expect(Tok::Colon, "':'");
    TypeParser tp(cur, pre_sorts);
    TypePtr sig = tp.type();
    if (!cur.at_end()) cur.fail("trailing tokens after signature");
    prog.fun_sigs.emplace_back(name, sig);
  }

  prog.finalize();

  // Defined symbols are the signature-bearing names plus all clause roots.
  for (auto& item : items) {
    if (classify(item) != ItemKind::Clause) continue;
    if (item.empty()) continue;
    const Token& t = item[0];
    if (t.kind != Tok::Ident || is_keyword(t.text))
      throw ParseError("expected a clause", t.line, t.column);
    if (prog.is_ctor(t.text))
      throw ParseError("constructor " + t.text + " used as a clause root",
                       t.line, t.column);
    if (!prog.is_fun(t.text))
      throw ParseError("clause root " + t.text + " has no signature", t.line,
                       t.column);
  }

  // Second pass: clauses.
  for (auto& item : items) {
    if (classify(item) != ItemKind::Clause) continue;
    Cursor cur(item);
    std::string root = expect_name(cur, "a clause root");
    ExprParser ep(cur, prog);
    Clause clause;
    clause.root = root;
    while (cur.peek().kind != Tok::Equals)
      clause.patterns.push_back(ep.pattern_atom());
    cur.expect(Tok::Equals, "'='");
    clause.body = ep.expr();
    if (!cur.at_end()) cur.fail("trailing tokens after clause body");
    prog.clauses.push_back(std::move(clause));
  }

  if (prog.clauses.empty())
    throw ParseError("program contains no clauses", 1, 1);
  return prog;
}

ValuePtr parse_data(const std::string& text, const Program& program) {
  std::vector<Token> toks = lex(text);
  std::vector<std::vector<Token>> items = split_items(toks);
  if (items.size() != 1)
    throw ParseError("expected a single data literal", 1, 1);
  Cursor cur(items[0]);
  ExprParser ep(cur, program);
  ExprPtr e = ep.expr();
  if (!cur.at_end()) cur.fail("trailing tokens after data literal");

  // Convert, allowing pair literals; reject variables and defined symbols.
  std::function<ValuePtr(const ExprPtr&)> conv = [&](const ExprPtr& x)
      -> ValuePtr {
    switch (x->kind) {
      case Expr::Kind::Ctor: {
        std::vector<ValuePtr> args;
        for (auto& a : x->parts) args.push_back(conv(a));
        return data_value(x->name, std::move(args));
      }
      case Expr::Kind::Pair:
        return pair_value(conv(x->parts[0]), conv(x->parts[1]));
      case Expr::Kind::Fun:
        throw ParseError("defined symbol in data position: " + x->name, 1, 1);
      case Expr::Kind::Var:
        throw ParseError("unknown constructor: " + x->name, 1, 1);
      default:
        throw ParseError("not a data literal", 1, 1);
    }
  };
  return conv(e);
}

TypePtr parse_type(const std::string& text, const Program& program) {
  std::vector<Token> toks = lex(text);
  std::vector<std::vector<Token>> items = split_items(toks);
  if (items.size() != 1) throw ParseError("expected a single type", 1, 1);
  Cursor cur(items[0]);
  std::set<std::string> sorts = program.sorts;
  if (sorts.empty()) sorts = {"bool", "list"};
  TypeParser tp(cur, sorts);
  TypePtr t = tp.type();
  if (!cur.at_end()) cur.fail("trailing tokens after type");
  return t;
}

// ---------------------------------------------------------------------------
// Pretty-printing.
// ---------------------------------------------------------------------------

namespace {

void print_type(std::ostream& os, const TypePtr& t, bool arrow_ok,
                bool pair_ok) {
  switch (t->kind) {
    case Type::Kind::Sort:
      os << t->name;
      break;
    case Type::Kind::Pair: {
      if (!pair_ok) os << "(";
      print_type(os, t->left, false, false);
      os << " * ";
      print_type(os, t->right, false, true);
      if (!pair_ok) os << ")";
      break;
    }
    case Type::Kind::Arrow: {
      if (!arrow_ok) os << "(";
      print_type(os, t->left, false, true);
      os << " => ";
      print_type(os, t->right, true, true);
      if (!arrow_ok) os << ")";
      break;
    }
  }
}

// Precedence levels for expression printing; higher binds tighter.
enum Level { kTop = 0, kConsArg = 1, kAppArg = 2 };

int expr_level(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::If:
      return kTop;
    case Expr::Kind::Ctor:
      if (e->name == "cons") return kConsArg;
      // A nullary constructor is self-delimiting; an applied one binds like
      // a function application.
      return e->parts.empty() ? kAppArg + 1 : kConsArg + 1;
    case Expr::Kind::Apply:
      return kConsArg + 1;  // binds tighter than ::, looser than atoms
    default:
      return kAppArg + 1;  // self-delimiting atoms
  }
}

void print_expr(std::ostream& os, const ExprPtr& e, int min_level);

void print_pair_chain(std::ostream& os, const ExprPtr& e) {
  os << "(";
  const Expr* cur = e.get();
  while (true) {
    print_expr(os, cur->parts[0], kTop);
    const Expr* right = cur->parts[1].get();
    if (right->kind == Expr::Kind::Pair) {
      os << ", ";
      cur = right;
    } else {
      os << ", ";
      print_expr(os, cur->parts[1], kTop);
      break;
    }
  }
  os << ")";
}

void print_expr(std::ostream& os, const ExprPtr& e, int min_level) {
  bool parens = expr_level(e) < min_level;
  switch (e->kind) {
    case Expr::Kind::Var:
    case Expr::Kind::Fun:
      os << e->name;
      return;
    case Expr::Kind::Pair:
      print_pair_chain(os, e);
      return;
    case Expr::Kind::Choose: {
      os << "choose(";
      for (size_t i = 0; i < e->parts.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, e->parts[i], kTop);
      }
      os << ")";
      return;
    }
    case Expr::Kind::If:
      if (parens) os << "(";
      os << "if ";
      print_expr(os, e->parts[0], kTop);
      os << " then ";
      print_expr(os, e->parts[1], kTop);
      os << " else ";
      print_expr(os, e->parts[2], kTop);
      if (parens) os << ")";
      return;
    case Expr::Kind::Ctor:
      if (e->name == "nil") {
        os << "[]";
        return;
      }
      if (e->name == "cons") {
        if (parens) os << "(";
        print_expr(os, e->parts[0], kConsArg + 1);
        os << "::";
        print_expr(os, e->parts[1], kConsArg);
        if (parens) os << ")";
        return;
      }
      if (parens) os << "(";
      os << e->name;
      for (auto& a : e->parts) {
        os << " ";
        print_expr(os, a, kAppArg + 1);
      }
      if (parens) os << ")";
      return;
    case Expr::Kind::Apply:
      if (parens) os << "(";
      print_expr(os, e->parts[0], kConsArg + 1);
      os << " ";
      print_expr(os, e->parts[1], kAppArg + 1);
      if (parens) os << ")";
      return;
  }
}

void print_pattern(std::ostream& os, const PatternPtr& p, bool atom_context) {
  switch (p->kind) {
    case Pattern::Kind::Var:
      os << p->name;
      return;
    case Pattern::Kind::Pair: {
      os << "(";
      const Pattern* cur = p.get();
      while (true) {
        print_pattern(os, cur->parts[0], false);
        os << ", ";
        if (cur->parts[1]->kind == Pattern::Kind::Pair) {
          cur = cur->parts[1].get();
        } else {
          print_pattern(os, cur->parts[1], false);
          break;
        }
      }
      os << ")";
      return;
    }
    case Pattern::Kind::Ctor:
      if (p->name == "nil") {
        os << "[]";
        return;
      }
      if (p->name == "cons") {
        if (atom_context) os << "(";
        print_pattern(os, p->parts[0], true);
        os << "::";
        print_pattern(os, p->parts[1],
                      p->parts[1]->kind == Pattern::Kind::Ctor &&
                              p->parts[1]->name == "cons"
                          ? false
                          : true);
        if (atom_context) os << ")";
        return;
      }
      if (p->parts.empty()) {
        os << p->name;
        return;
      }
      if (atom_context) os << "(";
      os << p->name;
      for (auto& a : p->parts) {
        os << " ";
        print_pattern(os, a, true);
      }
      if (atom_context) os << ")";
      return;
  }
}

}  // namespace

std::string pretty_print(const TypePtr& t) {
  std::ostringstream os;
  print_type(os, t, true, true);
  return os.str();
}

std::string pretty_print(const ExprPtr& e) {
  std::ostringstream os;
  print_expr(os, e, kTop);
  return os.str();
}

std::string pretty_print(const PatternPtr& p) {
  std::ostringstream os;
  print_pattern(os, p, false);
  return os.str();
}

std::string pretty_print(const ValuePtr& v) {
  ExprPtr e = data_to_expr(v);
  if (e) return pretty_print(e);
  // Closure: print as an application spine in angle-free notation.
  std::ostringstream os;
  os << v->name;
  for (auto& a : v->parts) {
    ExprPtr ae = data_to_expr(a);
    os << " ";
    if (ae) {
      print_expr(os, ae, kAppArg + 1);
    } else {
      os << "(" << pretty_print(a) << ")";
    }
  }
  return os.str();
}

std::string pretty_print(const Clause& c) {
  std::ostringstream os;
  os << c.root;
  for (auto& p : c.patterns) {
    os << " ";
    print_pattern(os, p, true);
  }
  os << " = ";
  print_expr(os, c.body, kTop);
  return os.str();
}

std::string pretty_print(const Program& p) {
  std::ostringstream os;
  for (auto& [sort, cdecls] : p.data_decls) {
    os << "data " << sort << " =";
    for (size_t i = 0; i < cdecls.size(); ++i) {
      os << (i ? " | " : " ") << cdecls[i].name;
      for (auto& t : cdecls[i].arg_types) {
        os << " ";
        if (t->kind == Type::Kind::Sort) {
          os << t->name;
        } else {
          os << "(" << pretty_print(t) << ")";
        }
      }
    }
    os << "\n";
  }
  if (!p.data_decls.empty()) os << "\n";
  for (auto& [name, sig] : p.fun_sigs)
    os << name << " : " << pretty_print(sig) << "\n";
  if (!p.fun_sigs.empty()) os << "\n";
  for (auto& c : p.clauses) os << pretty_print(c) << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Structural utilities.
// ---------------------------------------------------------------------------

namespace {

// include_self=false collects the strict sub-expressions only (used for the
// head position of applications).
void collect_sub(const ExprPtr& e, bool include_self, ExprSet& out) {
  if (include_self) out.insert(e);
  switch (e->kind) {
    case Expr::Kind::Var:
    case Expr::Kind::Fun:
      break;
    case Expr::Kind::Ctor:
    case Expr::Kind::If:
    case Expr::Kind::Choose:
    case Expr::Kind::Pair:
      for (auto& part : e->parts) collect_sub(part, true, out);
      break;
    case Expr::Kind::Apply:
      collect_sub(e->parts[0], false, out);
      collect_sub(e->parts[1], true, out);
      break;
  }
}

}  // namespace

ExprSet subexpressions(const ExprPtr& e) {
  ExprSet out;
  collect_sub(e, true, out);
  return out;
}

void collect_vars(const ExprPtr& e, std::set<std::string>& out) {
  if (e->kind == Expr::Kind::Var) out.insert(e->name);
  for (auto& part : e->parts) collect_vars(part, out);
}

void collect_vars(const PatternPtr& p, std::set<std::string>& out) {
  if (p->kind == Pattern::Kind::Var) out.insert(p->name);
  for (auto& part : p->parts) collect_vars(part, out);
}

bool is_ground_data(const ExprPtr& e) {
  if (e->kind != Expr::Kind::Ctor) return false;
  for (auto& a : e->parts)
    if (!is_ground_data(a)) return false;
  return true;
}

ValuePtr expr_to_data(const ExprPtr& e) {
  if (e->kind == Expr::Kind::Ctor) {
    std::vector<ValuePtr> args;
    for (auto& a : e->parts) {
      ValuePtr v = expr_to_data(a);
      if (!v) return nullptr;
      args.push_back(std::move(v));
    }
    return data_value(e->name, std::move(args));
  }
  return nullptr;
}

ExprPtr data_to_expr(const ValuePtr& v) {
  switch (v->kind) {
    case Value::Kind::Data: {
      std::vector<ExprPtr> args;
      for (auto& a : v->parts) {
        ExprPtr e = data_to_expr(a);
        if (!e) return nullptr;
        args.push_back(std::move(e));
      }
      return ctor_expr(v->name, std::move(args));
    }
    case Value::Kind::Pair: {
      ExprPtr l = data_to_expr(v->parts[0]);
      ExprPtr r = data_to_expr(v->parts[1]);
      if (!l || !r) return nullptr;
      return pair_expr(l, r);
    }
    case Value::Kind::Closure:
      return nullptr;
  }
  return nullptr;
}

}  // namespace consfree
