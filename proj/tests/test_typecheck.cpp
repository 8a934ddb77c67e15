#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "consfree/typecheck.hpp"

using namespace consfree;

namespace {

// Binary successor on little-endian bit lists; the base clause introduces
// ground data only, the other two build fresh non-ground lists.
const char* kSucc = R"(
succ : list => list

succ [] = true::[]
succ (false::xs) = true::xs
succ (true::xs) = false::(succ xs)
)";

// Higher-order counter: a number is a function list => bool.
const char* kFsucc = R"(
start : list => bool
fsucc : (list => bool) => list => list => bool
set : (list => bool) => list => bool => list => bool
tl : list => list
eqlen : list => list => bool

start xs = fsucc (eqlen xs) xs xs
fsucc f [] = if f [] then set f [] false else set f [] true
fsucc f xs = if f xs then fsucc (set f xs false) (tl xs) else set f xs true
set f xs val ys = if eqlen xs ys then val else f ys
tl (x::xs) = xs
eqlen (x::xs) (y::ys) = eqlen xs ys
eqlen [] [] = true
eqlen xs ys = false
)";

// Order-0 data but clauses of functional type; non-deterministic.
const char* kProper = R"(
data nat = o | s nat

start : nat => nat => nat
const : nat => nat => nat
id : nat => nat
fst : nat => nat => nat
snd : nat => nat => nat

start xs ys = choose(fst xs ys, snd xs ys)
const x y = x
id x = x
fst x = const x
snd x = id
)";

std::string error_of(const char* text) {
  try {
    check_program(parse_program(text));
  } catch (const TypeError& e) {
    return e.what();
  }
  return "";
}

TypePtr T(const std::string& s) {
  Program p;
  p.finalize();
  return parse_type(s, p);
}

void all_types(int length, std::vector<TypePtr>& out) {
  if (length <= 0) return;
  if (length == 1) {
    out.push_back(sort_type("bool"));
    return;
  }
  for (int l = 1; l < length; ++l) {
    std::vector<TypePtr> lefts, rights;
    all_types(l, lefts);
    all_types(length - l, rights);
    for (auto& a : lefts)
      for (auto& b : rights) {
        out.push_back(pair_type(a, b));
        out.push_back(arrow_type(a, b));
      }
  }
}

}  // namespace

TEST_CASE("type metrics golden values") {
  auto m1 = type_metrics(T("list => bool"));
  CHECK(m1.order == 1);
  CHECK(m1.arrow_depth == 1);
  CHECK(m1.length == 2);

  auto m2 = type_metrics(T("(bool => bool) => bool"));
  CHECK(m2.order == 2);
  CHECK(m2.arrow_depth == 2);
  CHECK(m2.length == 3);

  auto m3 = type_metrics(T("bool => bool => bool"));
  CHECK(m3.order == 1);
  CHECK(m3.arrow_depth == 2);
  CHECK(m3.length == 3);

  auto m4 = type_metrics(T("bool"));
  CHECK(m4.order == 0);
  CHECK(m4.arrow_depth == 0);
  CHECK(m4.length == 1);

  auto m5 = type_metrics(T("bool * list"));
  CHECK(m5.order == 0);
  CHECK(m5.arrow_depth == 0);
  CHECK(m5.length == 2);

  auto m6 = type_metrics(T("(bool => bool) * bool"));
  CHECK(m6.order == 1);
  CHECK(m6.arrow_depth == 1);
  CHECK(m6.length == 3);
}

TEST_CASE("arrow depth dominates order on all small types") {
  std::vector<TypePtr> types;
  for (int len = 1; len <= 4; ++len) all_types(len, types);
  CHECK(types.size() > 20);
  for (auto& t : types) {
    CAPTURE(pretty_print(t));
    CHECK(type_arrow_depth(t) >= type_order(t));
  }
}

TEST_CASE("successor program is accepted with the expected environments") {
  TypedProgram tp = check_program(parse_program(kSucc));
  CHECK(tp.main_fun == "succ");
  CHECK(tp.arities.at("succ") == 1);
  REQUIRE(tp.clause_envs.size() == 3);
  CHECK(tp.clause_envs[0].empty());
  REQUIRE(tp.clause_envs[1].count("xs") == 1);
  CHECK(pretty_print(tp.clause_envs[1].at("xs")) == "list");
  CHECK(pretty_print(tp.clause_types[0]) == "list");
  REQUIRE(tp.main_arg_types.size() == 1);
  CHECK(pretty_print(tp.main_result_type) == "list");

  // Environment inference is deterministic: re-checking yields the same maps.
  TypedProgram tp2 = check_program(parse_program(kSucc));
  for (size_t i = 0; i < tp.clause_envs.size(); ++i) {
    REQUIRE(tp.clause_envs[i].size() == tp2.clause_envs[i].size());
    for (auto& [name, t] : tp.clause_envs[i])
      CHECK(type_equal(t, tp2.clause_envs[i].at(name)));
  }
}

TEST_CASE("inconsistent arity is rejected") {
  std::string err = error_of(R"(
or : bool => bool => bool
id : bool => bool
or true x = true
or false = id
id x = x
)");
  CHECK(err.find("inconsistent arity") != std::string::npos);
}

TEST_CASE("main function restrictions") {
  // A higher-order first argument on the main function is rejected...
  std::string err = error_of(R"(
apply : (list => bool) => bool
apply f = f []
)");
  CHECK(err.find("order > 0") != std::string::npos);
  // ...but the same symbol is fine when it is not the main function.
  TypedProgram tp = check_program(parse_program(kFsucc));
  CHECK(tp.main_fun == "start");
}

TEST_CASE("constructor restrictions") {
  std::string err = error_of(R"(
data sym = wrap (bool => bool)
f : sym => bool
f x = true
)");
  CHECK(err.find("order > 0") != std::string::npos);
}

TEST_CASE("clause-level typing errors") {
  CHECK(error_of("f : bool => bool => bool\nf x x = x")
            .find("not linear") != std::string::npos);
  CHECK(error_of("f : bool => bool\nf x = y").find("not bound") !=
        std::string::npos);
  CHECK(error_of("f : bool => bool\nf x = if x then x else []")
            .find("different types") != std::string::npos);
  CHECK(error_of("f : bool => bool\nf x = if [] then x else x")
            .find("expected bool") != std::string::npos);
  CHECK(error_of("f : bool => bool\nf x = choose(x, [])")
            .find("different types") != std::string::npos);
  CHECK(error_of("f : bool => bool\nf x = x::[]").find("expected") !=
        std::string::npos);
  CHECK(error_of("f : bool => bool\nf x y = x").find("more arguments") !=
        std::string::npos);
  CHECK(error_of("f : bool => bool\nf x = f x x").find("non-arrow") !=
        std::string::npos);
  CHECK(error_of("f : bool => bool\nf (x, y) = x").find("non-pair") !=
        std::string::npos);
  CHECK(error_of("f : bool => bool\nf [] = true").find("used at type") !=
        std::string::npos);
}

TEST_CASE("pair patterns and bodies type correctly") {
  TypedProgram tp = check_program(parse_program(
      "f : bool * (bool * list) => list\nf (x, y, ys) = ys"));
  auto& env = tp.clause_envs[0];
  CHECK(pretty_print(env.at("x")) == "bool");
  CHECK(pretty_print(env.at("y")) == "bool");
  CHECK(pretty_print(env.at("ys")) == "list");
}

TEST_CASE("cons-freeness per clause") {
  TypedProgram succ = check_program(parse_program(kSucc));
  ConsFreeReport r = check_cons_free(succ);
  CHECK_FALSE(r.cons_free);
  REQUIRE(r.clause_cons_free.size() == 3);
  CHECK(r.clause_cons_free[0]);       // true::[] is ground data
  CHECK_FALSE(r.clause_cons_free[1]); // true::xs is fresh
  CHECK_FALSE(r.clause_cons_free[2]); // false::(succ xs) is fresh
  CHECK(r.offenders.size() >= 2);

  CHECK(check_cons_free(check_program(parse_program(kFsucc))).cons_free);
  CHECK(check_cons_free(check_program(parse_program(kProper))).cons_free);
  CHECK(check_cons_free(check_program(
                            parse_program("f : bool => bool\nf x = x")))
            .cons_free);
}

TEST_CASE("pattern sub-expressions keep a clause cons-free") {
  // x::xs in the body re-uses the pattern, so no fresh data is built.
  TypedProgram tp = check_program(parse_program(
      "f : list => list\nf (x::xs) = if x then x::xs else xs"));
  CHECK(check_cons_free(tp).cons_free);
  // Reordering under the constructor builds a different expression.
  TypedProgram tp2 = check_program(parse_program(
      "f : list => list\nf (x::(y::xs)) = y::(x::xs)"));
  CHECK_FALSE(check_cons_free(tp2).cons_free);
}

TEST_CASE("analysis report golden values") {
  AnalysisReport fs = analyze(check_program(parse_program(kFsucc)));
  CHECK(fs.cons_free);
  CHECK(fs.deterministic);
  CHECK(fs.data_order == 1);
  CHECK(fs.data_arrow_depth == 1);
  CHECK(fs.unitary);

  AnalysisReport pr = analyze(check_program(parse_program(kProper)));
  CHECK(pr.cons_free);
  CHECK_FALSE(pr.deterministic);
  CHECK(pr.data_order == 0);
  CHECK(pr.data_arrow_depth == 0);
  CHECK(pr.unitary);

  AnalysisReport id =
      analyze(check_program(parse_program("main : bool => bool\nmain x = x")));
  CHECK(id.cons_free);
  CHECK(id.deterministic);
  CHECK(id.data_order == 0);
  CHECK(id.data_arrow_depth == 0);
  CHECK(id.unitary);
  CHECK(report_to_text(id) ==
        "cons_free: yes\ndeterministic: yes\ndata_order: 0\narrow_depth: "
        "0\nunitary: yes\n");
}

TEST_CASE("unitary detection") {
  // h : (bool => bool) => bool => bool has an arrow codomain, so a variable
  // at this type is not unitary; its order is 2 and depth 2.
  AnalysisReport r = analyze(check_program(parse_program(R"(
main : bool => bool
g : ((bool => bool) => bool => bool) => bool
main x = x
g h = true
)")));
  CHECK_FALSE(r.unitary);
  CHECK(r.data_order == 2);
  CHECK(r.data_arrow_depth == 2);

  // A variable of type (bool => bool) => bool is order 2 but still unitary.
  AnalysisReport r2 = analyze(check_program(parse_program(R"(
main : bool => bool
g : ((bool => bool) => bool) => bool
main x = x
g h = true
)")));
  CHECK(r2.unitary);
  CHECK(r2.data_order == 2);
}
