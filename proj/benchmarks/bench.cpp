#include <benchmark/benchmark.h>

#include <sstream>

#include "consfree/eval.hpp"
#include "consfree/extensional.hpp"
#include "consfree/tmcompile.hpp"
#include "consfree/transform.hpp"

using namespace consfree;

namespace {

const char* const kParityTm =
    "alphabet: 0 1 _\n"
    "states: start even odd accept reject\n"
    "start _ -> _ R even\n"
    "start 0 -> 0 R even\n"
    "start 1 -> 1 R even\n"
    "even 0 -> 0 R even\n"
    "even 1 -> 1 R odd\n"
    "even _ -> _ R reject\n"
    "odd 0 -> 0 R odd\n"
    "odd 1 -> 1 R even\n"
    "odd _ -> _ R accept\n";

ValuePtr ones(int n) {
  ValuePtr v = data_value("nil", {});
  for (int i = 0; i < n; ++i) v = data_value("cons", {data_value("true", {}), v});
  return v;
}

const TypedProgram& parity_program() {
  static TypedProgram tp =
      check_program(compile_tm(parse_tm(kParityTm), 3, 1, 0));
  return tp;
}

void bm_parse_typecheck(benchmark::State& state) {
  std::ostringstream os;
  for (const Clause& c : parity_program().program.clauses)
    os << pretty_print(c) << "\n";
  std::string text;
  for (const auto& [sort, decls] : parity_program().program.data_decls) {
    text += "data " + sort + " =";
    std::string sep = " ";
    for (const auto& d : decls) {
      text += sep + d.name;
      for (const auto& at : d.arg_types) text += " " + pretty_print(at);
      sep = " | ";
    }
    text += "\n";
  }
  for (const auto& [name, t] : parity_program().program.fun_sigs)
    text += name + " : " + pretty_print(t) + "\n";
  text += os.str();
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_program(parse_program(text)));
  }
}
BENCHMARK(bm_parse_typecheck);

// Direct evaluation of a compiled machine recomputes configurations
// exponentially often; the input length is the benchmark argument.
void bm_eval_compiled_machine(benchmark::State& state) {
  const TypedProgram& tp = parity_program();
  ValuePtr input = ones(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_all(tp, {input}, 1u << 20));
  }
}
BENCHMARK(bm_eval_compiled_machine)->DenseRange(1, 3);

// Tabulation of the same machine is polynomial in the input length.
void bm_tabulate_compiled_machine(benchmark::State& state) {
  const TypedProgram& tp = parity_program();
  ValuePtr input = ones(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        tabulate(tp, {input}, ExtMode::Deterministic, TabMetric::Order, 0));
  }
}
BENCHMARK(bm_tabulate_compiled_machine)->DenseRange(1, 5);

// One full predecessor chain of the polynomial counting module.
void bm_counting_chain(benchmark::State& state) {
  CountingModule m = gen_count_poly(2, 2);
  TypedProgram tp = check_program(counting_module_program(m));
  int n = static_cast<int>(state.range(0));
  ValuePtr cs = ones(n);
  std::uint64_t total = 2ull * (n + 1) * (n + 1);
  for (auto _ : state) {
    ValuePtr v = *eval_call(tp, m.seed, {cs}, 1u << 16).values.begin();
    for (std::uint64_t t = 1; t < total; ++t) {
      v = *eval_call(tp, m.pred, {cs, v}, 1u << 16).values.begin();
    }
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(bm_counting_chain)->DenseRange(1, 4);

// Normalizing a higher-order program to the order-bounded form.
void bm_normalize(benchmark::State& state) {
  TypedProgram tp = check_program(parse_program(
      "start : list => bool\n"
      "fsucc : (list => bool) => list => list => bool\n"
      "set : (list => bool) => list => bool => list => bool\n"
      "tl : list => list\n"
      "eqlen : list => list => bool\n"
      "start xs = fsucc (eqlen xs) xs xs\n"
      "fsucc f [] = if f [] then set f [] false else set f [] true\n"
      "fsucc f xs = if f xs then fsucc (set f xs false) (tl xs) "
      "else set f xs true\n"
      "set f xs val ys = if eqlen xs ys then val else f ys\n"
      "tl (x::xs) = xs\n"
      "eqlen (x::xs) (y::ys) = eqlen xs ys\n"
      "eqlen [] [] = true\n"
      "eqlen xs ys = false\n"));
  Properness props{Properness::Mode::OrderAtMost, 1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(normalize(tp, props));
  }
}
BENCHMARK(bm_normalize);

}  // namespace

BENCHMARK_MAIN();
