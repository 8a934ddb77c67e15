// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure.  Each criterion is self-contained and timed.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "consfree/eval.hpp"
#include "consfree/extensional.hpp"
#include "consfree/tmcompile.hpp"
#include "consfree/transform.hpp"

using namespace consfree;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

TypedProgram load(const std::filesystem::path& p) {
  return check_program(parse_program(slurp(p)));
}

ValuePtr list_of(const std::vector<bool>& bits) {
  ValuePtr v = data_value("nil", {});
  for (auto it = bits.rbegin(); it != bits.rend(); ++it) {
    v = data_value("cons", {data_value(*it ? "true" : "false", {}), v});
  }
  return v;
}

bool same_values(const ValueSet& a, const ValueSet& b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), value_equal);
}

bool subset_values(const ValueSet& small, const ValueSet& big) {
  for (const auto& v : small) {
    bool found = false;
    for (const auto& w : big) {
      if (value_equal(v, w)) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

int value_nodes(const ValuePtr& v) {
  int n = 1;
  for (const auto& c : v->parts) n += value_nodes(c);
  return n;
}

// All data values of the type with at most `size` constructor nodes.
std::vector<ValuePtr> enum_data(const Program& p, const TypePtr& t, int size) {
  std::vector<ValuePtr> out;
  if (t->kind == Type::Kind::Sort) {
    for (const auto& [name, info] : p.ctors) {
      if (info.sort != t->name || size < 1) continue;
      std::vector<std::vector<ValuePtr>> tuples = {{}};
      for (const auto& at : info.arg_types) {
        std::vector<std::vector<ValuePtr>> next;
        for (const auto& tup : tuples) {
          for (const auto& v : enum_data(p, at, size - 1)) {
            auto ext = tup;
            ext.push_back(v);
            next.push_back(std::move(ext));
          }
        }
        tuples = std::move(next);
      }
      for (const auto& tup : tuples) {
        int total = 1;
        for (const auto& v : tup) total += value_nodes(v);
        if (total <= size) out.push_back(data_value(name, tup));
      }
    }
  } else if (t->kind == Type::Kind::Pair) {
    for (const auto& l : enum_data(p, t->left, size)) {
      for (const auto& r : enum_data(p, t->right, size)) {
        out.push_back(pair_value(l, r));
      }
    }
  }
  std::sort(out.begin(), out.end(), ValueLess{});
  return out;
}

// All input tuples for the program's entry point, each value small.
std::vector<std::vector<ValuePtr>> input_tuples(const TypedProgram& tp,
                                                int size) {
  std::vector<std::vector<ValuePtr>> tuples = {{}};
  for (const auto& at : tp.main_arg_types) {
    std::vector<std::vector<ValuePtr>> next;
    for (const auto& tup : tuples) {
      for (const auto& v : enum_data(tp.program, at, size)) {
        auto ext = tup;
        ext.push_back(v);
        next.push_back(std::move(ext));
      }
    }
    tuples = std::move(next);
  }
  return tuples;
}

std::vector<std::filesystem::path> corpus_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(CORPUS_DIR)) {
    if (e.path().extension() == ".cf") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Criteria.
// ---------------------------------------------------------------------------

void criterion_goldens(Check& c) {
  // Binary successor on the little-endian numeral five gives six.
  TypedProgram succ = check_program(parse_program(
      "succ : list => list\n"
      "succ [] = true::[]\n"
      "succ (false::xs) = true::xs\n"
      "succ (true::xs) = false::(succ xs)\n"));
  EvalOutcome o = eval_all(succ, {list_of({true, false, true})}, 1024);
  c.require(o.exhausted && o.values.size() == 1 &&
                value_equal(*o.values.begin(),
                            list_of({false, true, true})),
            "successor of five is not six");

  // Choice over two booleans yields both.
  TypedProgram ch = check_program(parse_program(
      "main : bool => bool => bool\nmain x y = choose(x, y)\n"));
  EvalOutcome co = eval_all(
      ch, {data_value("true", {}), data_value("false", {})}, 1024);
  c.require(co.exhausted && co.values.size() == 2,
            "choice does not yield both values");

  // Counting module with bound 3*(n+1)^2: one predecessor step 24 -> 23.
  CountingModule m = gen_count_poly(3, 2);
  TypedProgram cm = check_program(counting_module_program(m));
  ValuePtr cs = list_of({true, false, true});
  auto tup = [](ValuePtr a, ValuePtr b, ValuePtr c2) {
    return pair_value(std::move(a), pair_value(std::move(b), std::move(c2)));
  };
  ValuePtr v24 = tup(list_of({false}), list_of({false, true}), list_of({}));
  EvalOutcome pr = eval_call(cm, m.pred, {cs, v24}, 1 << 16);
  c.require(pr.exhausted && pr.values.size() == 1 &&
                value_equal(*pr.values.begin(),
                            tup(list_of({false}), list_of({true}), cs)),
            "predecessor of 24 is not 23");

  // The functional-successor program has data order 1.
  TypedProgram fsucc =
      load(std::filesystem::path(CORPUS_DIR) / "fsucc.cf");
  c.require(analyze(fsucc).data_order == 1, "fsucc data order is not 1");

  // Clause-wise cons-freeness of the successor program: only the first
  // clause builds nothing fresh.
  ConsFreeReport cf = check_cons_free(succ);
  c.require(!cf.cons_free && cf.clause_cons_free ==
                                 std::vector<bool>{true, false, false},
            "clause-wise cons-freeness mismatch");

  // Inconsistent clause arity is rejected.
  bool rejected = false;
  try {
    check_program(parse_program("or : bool => bool => bool\n"
                                "id : bool => bool\n"
                                "or true x = true\n"
                                "or false = id\n"
                                "id x = x\n"));
  } catch (const TypeError&) {
    rejected = true;
  }
  c.require(rejected, "inconsistent arity not rejected");
}

void criterion_corpus(Check& c) {
  auto files = corpus_files();
  int nondet = 0, order1 = 0, bitset = 0;
  for (const auto& f : files) {
    TypedProgram tp = load(f);
    AnalysisReport r = analyze(tp);
    if (!r.deterministic) ++nondet;
    if (r.data_order == 1) ++order1;
    if (slurp(f).find("bitset") != std::string::npos) ++bitset;
    ExtMode mode =
        r.deterministic ? ExtMode::Deterministic : ExtMode::Nondeterministic;
    for (const auto& tup : input_tuples(tp, 4)) {
      ValueSet tab = tabulate(tp, tup, mode, TabMetric::Order, r.data_order);
      if (r.deterministic) {
        c.require(tab.size() <= 1,
                  f.filename().string() + ": deterministic program with " +
                      std::to_string(tab.size()) + " outcomes");
      }
      EvalOutcome o = eval_all(tp, tup, 2048);
      if (o.exhausted) {
        c.require(same_values(o.values, tab),
                  f.filename().string() + ": tabulation differs from "
                                          "exhaustive evaluation");
      } else {
        c.require(subset_values(o.values, tab),
                  f.filename().string() + ": tabulation misses an "
                                          "enumerated outcome");
      }
    }
  }
  c.require(files.size() >= 20, "corpus has fewer than 20 programs");
  c.require(nondet >= 8, "fewer than 8 non-deterministic programs");
  c.require(order1 >= 5, "fewer than 5 data-order-1 programs");
  c.require(bitset >= 3, "fewer than 3 looping-bitset programs");
}

void criterion_counting(Check& c) {
  auto single = [&](const TypedProgram& tp, const std::string& fun,
                    std::vector<ValuePtr> args) {
    EvalOutcome o = eval_call(tp, fun, args, 1 << 18);
    if (!o.exhausted || o.values.size() != 1) {
      throw std::runtime_error("no unique value for " + fun);
    }
    return *o.values.begin();
  };
  auto is_true = [](const ValuePtr& v) { return v->name == "true"; };

  // Polynomial modules: chains of exactly a*(n+1)^b values.
  for (int a = 1; a <= 2; ++a) {
    for (int b = 1; b <= 2; ++b) {
      CountingModule m = gen_count_poly(a, b);
      TypedProgram tp = check_program(counting_module_program(m));
      for (int n = 0; n <= 3; ++n) {
        ValuePtr cs = list_of(std::vector<bool>(n, true));
        std::uint64_t total = a;
        for (int i = 0; i < b; ++i) total *= n + 1;
        ValuePtr v = single(tp, m.seed, {cs});
        for (std::uint64_t t = 0; t < total; ++t) {
          bool z = is_true(single(tp, m.zero, {cs, v}));
          c.require(z == (t == total - 1), "polynomial zero at wrong step");
          v = single(tp, m.pred, {cs, v});
        }
      }
    }
  }

  // Exponential module over the linear one: chains of 2^(n+1) values.
  {
    CountingModule m = gen_count_exp(gen_count_poly(1, 1));
    TypedProgram tp = check_program(counting_module_program(m));
    for (int n = 0; n <= 1; ++n) {
      ValuePtr cs = list_of(std::vector<bool>(n, true));
      std::uint64_t total = 1ull << (n + 1);
      ValuePtr v = single(tp, m.seed, {cs});
      for (std::uint64_t t = 0; t < total; ++t) {
        bool z = is_true(single(tp, m.zero, {cs, v}));
        c.require(z == (t == total - 1), "exponential zero at wrong step");
        v = single(tp, m.pred, {cs, v});
      }
    }
  }

  // Non-deterministic module: chains of 2^n values, decided by tabulation.
  {
    CountingModule m = gen_count_nondet(gen_count_poly(1, 1));
    for (int n = 0; n <= 1; ++n) {
      ValuePtr cs = list_of(std::vector<bool>(n, true));
      std::uint64_t total = 1ull << n;
      for (std::uint64_t j = 0; j < total; ++j) {
        TypedProgram tp = check_program(
            counting_module_program(m, static_cast<int>(j)));
        ValueSet got = tabulate(tp, {cs}, ExtMode::Nondeterministic,
                                TabMetric::Depth, 1);
        bool expect = j == total - 1;
        c.require(got.size() == 1 && is_true(*got.begin()) == expect,
                  "non-deterministic zero at wrong step");
      }
    }
  }
}

void criterion_tm(Check& c) {
  for (auto [file, a] : {std::pair{"parity.tm", 2}, std::pair{"lastbit.tm", 3}}) {
    TmSpec tm = parse_tm(slurp(std::filesystem::path(CORPUS_DIR) / file));
    TypedProgram tp = check_program(compile_tm(tm, a, 1, 0));
    AnalysisReport r = analyze(tp);
    c.require(r.cons_free && r.deterministic && r.data_order == 0 && r.unitary,
              std::string(file) + ": compiled program fails the analyses");
    for (int len = 1; len <= 5; ++len) {
      for (std::uint64_t bitsmask = 0; bitsmask < (1ull << len); ++bitsmask) {
        std::vector<bool> bits(len);
        for (int i = 0; i < len; ++i) bits[i] = (bitsmask >> i) & 1;
        bool expect = run_tm(tm, bits, 1000) == TmResult::Accept;
        ValueSet got = tabulate(tp, {list_of(bits)}, ExtMode::Deterministic,
                                TabMetric::Order, 0);
        c.require(got.size() == 1 &&
                      ((*got.begin())->name == "true") == expect,
                  std::string(file) + ": verdict mismatch");
      }
    }
  }
}

void criterion_cardinality(Check& c) {
  Program p;
  p.finalize();
  ValueSet universe = {data_value("true", {}), data_value("false", {})};
  TypePtr boolean = sort_type("bool");
  // All types of length up to 3 over the one sort.
  std::vector<TypePtr> by_len[4];
  by_len[1] = {boolean};
  for (int len = 2; len <= 3; ++len) {
    for (int l = 1; l < len; ++l) {
      for (const auto& a : by_len[l]) {
        for (const auto& b : by_len[len - l]) {
          by_len[len].push_back(pair_type(a, b));
          by_len[len].push_back(arrow_type(a, b));
        }
      }
    }
  }
  for (int len = 1; len <= 3; ++len) {
    for (const auto& t : by_len[len]) {
      for (auto [mode, metric] :
           {std::pair{ExtMode::Deterministic, TabMetric::Order},
            std::pair{ExtMode::Nondeterministic, TabMetric::Depth}}) {
        mpz_class count = ext_count(p, universe, t, mode);
        if (count <= 200000) {
          // Cross-check the closed-form count against the enumeration.
          auto vals = enumerate_ext(p, universe, t, mode);
          c.require(mpz_class(vals.size()) == count,
                    "enumeration disagrees with the counting formula");
        }
        c.require(count < cardinality_bound(t, 3, metric),
                  "interpretation count not below the cardinality bound");
      }
    }
  }
}

void criterion_transform(Check& c) {
  for (const auto& f : corpus_files()) {
    TypedProgram tp = load(f);
    AnalysisReport r = analyze(tp);
    std::vector<Properness> modes;
    modes.push_back({Properness::Mode::OrderAtMost, r.data_order});
    modes.push_back({Properness::Mode::DepthAtMost, r.data_arrow_depth});
    modes.push_back({Properness::Mode::RecursivelyUnitary, 0});
    for (const auto& props : modes) {
      TypedProgram norm;
      try {
        norm = normalize(tp, props);
      } catch (const TransformError&) {
        continue;  // not applicable to this program
      }
      check_normalized(norm, props);  // throws on a broken post-condition
      for (const auto& tup : input_tuples(tp, 4)) {
        EvalOutcome a = eval_all(tp, tup, 2048);
        if (!a.exhausted) continue;
        // The wrapper clause adds one derivation step.
        EvalOutcome b = eval_all(norm, tup, 4096);
        c.require(b.exhausted && same_values(a.values, b.values),
                  f.filename().string() + ": normalization changes results");
      }
    }
  }
}

void criterion_determinism(Check& c) {
  // Checked together with the corpus criterion; restated here over the
  // deterministic files only so the gate line exists on its own.
  for (const auto& f : corpus_files()) {
    TypedProgram tp = load(f);
    AnalysisReport r = analyze(tp);
    if (!r.deterministic) continue;
    for (const auto& tup : input_tuples(tp, 4)) {
      ValueSet tab = tabulate(tp, tup, ExtMode::Deterministic,
                              TabMetric::Order, r.data_order);
      c.require(tab.size() <= 1,
                f.filename().string() + ": more than one outcome");
    }
  }
}

}  // namespace

int main() {
  struct Criterion {
    std::string name;
    double budget_seconds;
    std::function<void(Check&)> body;
  };
  std::vector<Criterion> criteria = {
      {"1 golden examples", 1, criterion_goldens},
      {"2 corpus tabulation vs evaluation", 300, criterion_corpus},
      {"3 counting-module chains", 120, criterion_counting},
      {"4 compiled machines vs direct execution", 180, criterion_tm},
      {"5 cardinality bounds", 60, criterion_cardinality},
      {"6 normalization preserves results", 180, criterion_transform},
      {"7 deterministic programs yield at most one value", 300,
       criterion_determinism},
  };
  bool all_ok = true;
  for (const auto& cr : criteria) {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    try {
      cr.body(c);
    } catch (const std::exception& e) {
      c.require(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    c.require(secs < cr.budget_seconds, "over time budget");
    std::ostringstream line;
    line.setf(std::ios::fixed);
    line.precision(1);
    line << (c.ok ? "PASS" : "FAIL") << " criterion " << cr.name << " ("
         << secs << "s)";
    if (!c.ok) line << ": " << c.detail;
    std::cout << line.str() << "\n";
    all_ok = all_ok && c.ok;
  }
  return all_ok ? 0 : 1;
}
