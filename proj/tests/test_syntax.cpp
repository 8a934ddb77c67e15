#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "consfree/syntax.hpp"

using namespace consfree;

namespace {

const char* kSuccProgram = R"(
succ : list => list => list
sc : list => list => list => list
equal : list => list => list => bool
pred : list => list
zero : list => bool
seed : list => list

succ cs i = sc cs (seed cs) i
sc cs j i = if equal cs (pred j) i then j else sc cs (pred j) i
equal cs i j = if zero i then zero j else if zero j then false else equal cs (pred i) (pred j)
pred (x::xs) = xs
pred [] = []
zero (x::xs) = false
zero [] = true
seed cs = cs
)";

Program fixture() {
  return parse_program(R"(
data sym = c0 | c1 | mark (bool => bool) sym

f : bool => bool => bool
g : (bool => bool) => bool * bool

f x y = x
g h = (h true, false)
)");
}

// Independent transcription of the sub-expression relation, written as a
// pair of mutually recursive predicates (holds(s |> t) / holds(s |>= t))
// instead of a set computation, then enumerated over all nodes.
bool strict_sub(const ExprPtr& s, const ExprPtr& t);

bool sub_eq(const ExprPtr& s, const ExprPtr& t) {
  return expr_equal(s, t) || strict_sub(s, t);
}

bool strict_sub(const ExprPtr& s, const ExprPtr& t) {
  switch (s->kind) {
    case Expr::Kind::Var:
    case Expr::Kind::Fun:
      return false;
    case Expr::Kind::Pair:
    case Expr::Kind::If:
    case Expr::Kind::Choose: {
      for (auto& part : s->parts)
        if (sub_eq(part, t)) return true;
      return false;
    }
    case Expr::Kind::Apply:
      return strict_sub(s->parts[0], t) || sub_eq(s->parts[1], t);
    case Expr::Kind::Ctor: {
      // c s1..sm behaves like (..(c s1)..sm): heads contribute strictly, so
      // only the arguments' reflexive closures remain.
      for (auto& part : s->parts)
        if (sub_eq(part, t)) return true;
      return false;
    }
  }
  return false;
}

void all_nodes(const ExprPtr& e, std::vector<ExprPtr>& out) {
  out.push_back(e);
  for (auto& part : e->parts) all_nodes(part, out);
}

ExprPtr random_expr(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 3 : 9);
  switch (pick(rng)) {
    case 0:
      return var_expr("x");
    case 1:
      return var_expr("y");
    case 2:
      return fun_expr("f");
    case 3:
      return rng() % 2 ? ctor_expr("c0", {}) : ctor_expr("c1", {});
    case 4:
      return ctor_expr("mark", {random_expr(rng, depth - 1),
                                random_expr(rng, depth - 1)});
    case 5:
      return if_expr(random_expr(rng, depth - 1), random_expr(rng, depth - 1),
                     random_expr(rng, depth - 1));
    case 6: {
      std::vector<ExprPtr> alts;
      int n = 1 + static_cast<int>(rng() % 3);
      for (int i = 0; i < n; ++i) alts.push_back(random_expr(rng, depth - 1));
      return choose_expr(std::move(alts));
    }
    case 7:
      return pair_expr(random_expr(rng, depth - 1),
                       random_expr(rng, depth - 1));
    default:
      return apply_expr(random_expr(rng, depth - 1),
                        random_expr(rng, depth - 1));
  }
}

}  // namespace

TEST_CASE("type parsing: precedence and round trips") {
  Program p;
  p.finalize();
  auto rt = [&](const std::string& s) {
    TypePtr t = parse_type(s, p);
    TypePtr again = parse_type(pretty_print(t), p);
    CHECK(type_equal(t, again));
    return t;
  };

  TypePtr t1 = rt("bool => bool * list => bool");
  REQUIRE(t1->kind == Type::Kind::Arrow);
  CHECK(t1->left->kind == Type::Kind::Sort);
  REQUIRE(t1->right->kind == Type::Kind::Arrow);
  CHECK(t1->right->left->kind == Type::Kind::Pair);

  TypePtr t2 = rt("bool * bool * list");
  REQUIRE(t2->kind == Type::Kind::Pair);
  CHECK(t2->left->kind == Type::Kind::Sort);
  CHECK(t2->right->kind == Type::Kind::Pair);

  TypePtr t3 = rt("(bool => bool) => list");
  REQUIRE(t3->kind == Type::Kind::Arrow);
  CHECK(t3->left->kind == Type::Kind::Arrow);

  CHECK(pretty_print(rt("(bool * list) * bool")) == "(bool * list) * bool");
  CHECK_THROWS_AS(parse_type("nat", p), ParseError);
  CHECK_THROWS_AS(parse_type("bool =>", p), ParseError);
}

TEST_CASE("program parsing: clause structure and list sugar") {
  Program p = parse_program(kSuccProgram);
  CHECK(p.clauses.size() == 8);
  CHECK(p.fun_sigs.size() == 6);
  CHECK(p.clauses[0].root == "succ");

  // sc cs j i = if equal cs (pred j) i then j else sc cs (pred j) i
  const Clause& sc = p.clauses[1];
  REQUIRE(sc.patterns.size() == 3);
  CHECK(sc.patterns[0]->kind == Pattern::Kind::Var);
  REQUIRE(sc.body->kind == Expr::Kind::If);
  const ExprPtr& cond = sc.body->parts[0];
  // Application is left-associative: ((equal cs) (pred j)) i.
  REQUIRE(cond->kind == Expr::Kind::Apply);
  CHECK(cond->parts[1]->kind == Expr::Kind::Var);
  REQUIRE(cond->parts[0]->kind == Expr::Kind::Apply);
  REQUIRE(cond->parts[0]->parts[0]->kind == Expr::Kind::Apply);
  CHECK(cond->parts[0]->parts[0]->parts[0]->kind == Expr::Kind::Fun);
  CHECK(cond->parts[0]->parts[0]->parts[0]->name == "equal");

  // pred (x::xs) = xs uses the built-in cons constructor.
  const Clause& predc = p.clauses[3];
  REQUIRE(predc.patterns.size() == 1);
  REQUIRE(predc.patterns[0]->kind == Pattern::Kind::Ctor);
  CHECK(predc.patterns[0]->name == "cons");
  CHECK(predc.patterns[0]->parts[1]->kind == Pattern::Kind::Var);

  // Round trip through the printer.
  Program q = parse_program(pretty_print(p));
  CHECK(program_equal(p, q));
}

TEST_CASE("expression forms: if, choose, pairs, cons chains") {
  Program p = parse_program(R"(
main : bool => bool * bool
pick : list => list

main x = (choose(x, true), if x then false else x)
pick cs = true::false::cs
)");
  const ExprPtr& body = p.clauses[0].body;
  REQUIRE(body->kind == Expr::Kind::Pair);
  CHECK(body->parts[0]->kind == Expr::Kind::Choose);
  CHECK(body->parts[0]->parts.size() == 2);
  CHECK(body->parts[1]->kind == Expr::Kind::If);

  // :: is right-associative: true::(false::cs).
  const ExprPtr& chain = p.clauses[1].body;
  REQUIRE(chain->kind == Expr::Kind::Ctor);
  CHECK(chain->name == "cons");
  CHECK(chain->parts[1]->kind == Expr::Kind::Ctor);
  CHECK(chain->parts[1]->parts[1]->kind == Expr::Kind::Var);

  Program q = parse_program(pretty_print(p));
  CHECK(program_equal(p, q));
}

TEST_CASE("tuples are right-nested pairs") {
  Program p = parse_program("f : bool\nf = (true, false, true)");
  const ExprPtr& b = p.clauses[0].body;
  REQUIRE(b->kind == Expr::Kind::Pair);
  REQUIRE(b->parts[1]->kind == Expr::Kind::Pair);
  CHECK(b->parts[1]->parts[0]->name == "false");
  CHECK(pretty_print(b) == "(true, false, true)");
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_program("f : bool\nf = cons true"), ParseError);
  CHECK_THROWS_AS(parse_program("f = true"), ParseError);  // no signature
  CHECK_THROWS_AS(parse_program("data bool = tt | ff\nf : bool\nf = tt"),
                  ParseError);  // redeclares built-in sort
  CHECK_THROWS_AS(parse_program("data s = true\nf : s\nf = true"),
                  ParseError);  // redeclares built-in constructor
  CHECK_THROWS_AS(parse_program("f : nat\nf = true"), ParseError);
  CHECK_THROWS_AS(parse_program("f : bool\nf = if true then false"),
                  ParseError);
  CHECK_THROWS_AS(parse_program("f : bool => bool\nf true = cons"),
                  ParseError);  // unapplied non-nullary constructor
  CHECK_THROWS_AS(parse_program(""), ParseError);
  CHECK_THROWS_AS(parse_program("f : bool\nf f = true"),
                  ParseError);  // defined symbol in a pattern
}

TEST_CASE("defined symbols versus variables in bodies") {
  Program p = parse_program("f : bool\ng : bool\nf = g\ng = true");
  CHECK(p.clauses[0].body->kind == Expr::Kind::Fun);
  // Without a signature, g in a body is just a variable, and a clause for it
  // is rejected.
  CHECK_THROWS_AS(parse_program("f : bool\nf = g\ng = true"), ParseError);
}

TEST_CASE("clause roots without signatures are rejected") {
  CHECK_THROWS_AS(parse_program("f : bool\nf = true\nh x = x"), ParseError);
}

TEST_CASE("comments and blank lines are skipped") {
  Program p = parse_program(
      "-- leading comment\n"
      "f : bool -- trailing\n"
      "\n"
      "f = true  -- done\n");
  CHECK(p.clauses.size() == 1);
  CHECK(p.clauses[0].body->name == "true");
}

TEST_CASE("data declarations with continuation lines") {
  Program p = parse_program(R"(
data direc = lft
  | rgt
data trans = action bool direc | stop

f : direc => bool
f lft = true
f rgt = false
)");
  CHECK(p.ctors.at("action").sort == "trans");
  CHECK(p.ctors.at("action").arg_types.size() == 2);
  CHECK(p.ctors.at("lft").sort == "direc");
  Program q = parse_program(pretty_print(p));
  CHECK(program_equal(p, q));
}

TEST_CASE("higher-order constructor argument types") {
  Program p = fixture();
  auto& mark = p.ctors.at("mark");
  REQUIRE(mark.arg_types.size() == 2);
  CHECK(mark.arg_types[0]->kind == Type::Kind::Arrow);
  CHECK(mark.arg_types[1]->kind == Type::Kind::Sort);
}

TEST_CASE("parse_data literals") {
  Program p = fixture();
  ValuePtr v = parse_data("true::false::[]", p);
  REQUIRE(v->kind == Value::Kind::Data);
  CHECK(v->name == "cons");
  CHECK(v->parts[1]->parts[0]->name == "false");
  CHECK(pretty_print(v) == "true::false::[]");

  CHECK_THROWS_AS(parse_data("(c0, c1::?", p), ParseError);
}

TEST_CASE("parse_data rejects non-data") {
  Program p = fixture();
  CHECK_THROWS_AS(parse_data("x", p), ParseError);
  CHECK_THROWS_AS(parse_data("f", p), ParseError);
  CHECK_THROWS_AS(parse_data("if true then c0 else c1", p), ParseError);
  CHECK(value_equal(parse_data("(c0, c1)", p),
                    pair_value(data_value("c0", {}), data_value("c1", {}))));
}

TEST_CASE("sub-expressions match the relational oracle") {
  std::mt19937 rng(20260825);
  for (int round = 0; round < 120; ++round) {
    ExprPtr e = random_expr(rng, 4);
    ExprSet subs = subexpressions(e);
    std::vector<ExprPtr> nodes;
    all_nodes(e, nodes);
    // Soundness: every reported sub-expression satisfies the relation.
    for (auto& t : subs) CHECK(sub_eq(e, t));
    // Completeness over the node universe (every sub-expression of e is one
    // of its AST nodes, so this universe is exhaustive).
    for (auto& n : nodes) {
      CAPTURE(pretty_print(e));
      CAPTURE(pretty_print(n));
      CHECK(sub_eq(e, n) == (subs.count(n) > 0));
    }
  }
}

TEST_CASE("application heads are not sub-expressions") {
  // In (f x) y the node (f x) is not a sub-expression, but x and y are.
  ExprPtr fx = apply_expr(fun_expr("f"), var_expr("x"));
  ExprPtr e = apply_expr(fx, var_expr("y"));
  ExprSet subs = subexpressions(e);
  CHECK(subs.count(e) == 1);
  CHECK(subs.count(fx) == 0);
  CHECK(subs.count(var_expr("x")) == 1);
  CHECK(subs.count(var_expr("y")) == 1);
  CHECK(subs.count(fun_expr("f")) == 0);
  CHECK(subs.size() == 3);
}

TEST_CASE("random expressions round-trip through the printer") {
  Program p = fixture();
  std::mt19937 rng(7);
  for (int round = 0; round < 120; ++round) {
    ExprPtr e = random_expr(rng, 4);
    std::string text = "f : bool => bool => bool\ng : bool\nmark2 : bool\nf x y = " +
                       pretty_print(e) + "\ng = true\nmark2 = false";
    // The fixture's ctors c0/c1/mark must exist in the re-parsed program.
    std::string full =
        "data sym = c0 | c1 | mark (bool => bool) sym\n" + text;
    Program q = parse_program(full);
    CAPTURE(pretty_print(e));
    CHECK(expr_equal(q.clauses[0].body, e));
  }
}

TEST_CASE("values: comparison and closures") {
  ValuePtr a = data_value("true", {});
  ValuePtr b = data_value("false", {});
  CHECK(value_compare(a, a) == 0);
  CHECK(value_compare(a, b) != 0);
  ValuePtr c = closure_value("f", {a});
  CHECK(c->kind == Value::Kind::Closure);
  CHECK(data_to_expr(c) == nullptr);
  CHECK(pretty_print(c) == "f true");
  ValuePtr pr = pair_value(a, c);
  CHECK(data_to_expr(pr) == nullptr);
}

TEST_CASE("ground data conversion") {
  Program p = fixture();
  ExprPtr e = parse_program("f : list\nf = true::[]").clauses[0].body;
  CHECK(is_ground_data(e));
  ValuePtr v = expr_to_data(e);
  REQUIRE(v != nullptr);
  CHECK(expr_equal(data_to_expr(v), e));
  CHECK_FALSE(is_ground_data(var_expr("x")));
  CHECK_FALSE(is_ground_data(pair_expr(e, e)));  // pairs are values, not data
  CHECK(expr_to_data(ctor_expr("mark", {var_expr("x"), ctor_expr("c0", {})})) ==
        nullptr);
}

TEST_CASE("collect_vars") {
  Program p = parse_program(
      "f : bool => bool => bool\nf x (y::ys) = if x then y else f x ys");
  std::set<std::string> pv, bv;
  for (auto& pat : p.clauses[0].patterns) collect_vars(pat, pv);
  collect_vars(p.clauses[0].body, bv);
  CHECK(pv == std::set<std::string>({"x", "y", "ys"}));
  CHECK(bv == std::set<std::string>({"x", "y", "ys"}));
}
