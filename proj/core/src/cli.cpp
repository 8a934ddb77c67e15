#include "consfree/cli.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "consfree/eval.hpp"
#include "consfree/extensional.hpp"
#include "consfree/tmcompile.hpp"
#include "consfree/transform.hpp"

namespace consfree {

namespace {

// Exit codes per the front-end contract.
constexpr int kOk = 0;
constexpr int kRejected = 1;
constexpr int kUsage = 2;

struct CliFailure {
  int code;
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliFailure{kUsage, "cannot read file: " + path};
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_output(const std::string& path, const std::string& text,
                  std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream o(path);
  if (!o) throw CliFailure{kUsage, "cannot write file: " + path};
  o << text;
}

TypedProgram load_program(const std::string& path) {
  return check_program(parse_program(read_file(path)));
}

std::vector<ValuePtr> parse_inputs(const std::vector<std::string>& texts,
                                   const Program& p) {
  std::vector<ValuePtr> out;
  for (const auto& t : texts) out.push_back(parse_data(t, p));
  return out;
}

// All data values of a type with at most `size` constructor nodes, for the
// transform equivalence check.
void enum_data(const Program& p, const TypePtr& t, int size,
               std::vector<ValuePtr>& out) {
  if (t->kind == Type::Kind::Sort) {
    for (const auto& [name, info] : p.ctors) {
      if (info.sort != t->name || size < 1) continue;
      // Budget for the arguments after spending one node on the head.
      std::vector<std::vector<ValuePtr>> parts;
      bool ok = true;
      int rest = size - 1;
      for (const auto& at : info.arg_types) {
        std::vector<ValuePtr> vs;
        enum_data(p, at, rest, vs);
        if (vs.empty()) ok = false;
        parts.push_back(std::move(vs));
      }
      if (!ok) continue;
      // Cartesian product, keeping only tuples within the total budget.
      std::vector<std::vector<ValuePtr>> tuples = {{}};
      for (const auto& vs : parts) {
        std::vector<std::vector<ValuePtr>> next;
        for (const auto& tup : tuples) {
          for (const auto& v : vs) {
            auto ext = tup;
            ext.push_back(v);
            next.push_back(std::move(ext));
          }
        }
        tuples = std::move(next);
      }
      auto nodes = [](const ValuePtr& v) {
        int n = 0;
        std::vector<const Value*> stack = {v.get()};
        while (!stack.empty()) {
          const Value* cur = stack.back();
          stack.pop_back();
          ++n;
          for (const auto& c : cur->parts) stack.push_back(c.get());
        }
        return n;
      };
      for (const auto& tup : tuples) {
        int total = 1;
        for (const auto& v : tup) total += nodes(v);
        if (total <= size) out.push_back(data_value(name, tup));
      }
    }
  } else if (t->kind == Type::Kind::Pair) {
    std::vector<ValuePtr> ls, rs;
    enum_data(p, t->left, size, ls);
    enum_data(p, t->right, size, rs);
    for (const auto& l : ls) {
      for (const auto& r : rs) out.push_back(pair_value(l, r));
    }
  }
  std::sort(out.begin(), out.end(), ValueLess{});
  out.erase(std::unique(out.begin(), out.end(),
                        [](const ValuePtr& a, const ValuePtr& b) {
                          return value_equal(a, b);
                        }),
            out.end());
}

int do_check(const std::string& file, std::ostream& out) {
  load_program(file);
  out << "ok\n";
  return kOk;
}

int do_analyze(const std::string& file, std::ostream& out) {
  out << report_to_text(analyze(load_program(file)));
  return kOk;
}

int do_run(const std::string& file, const std::vector<std::string>& inputs,
           std::uint64_t fuel, bool sample, std::uint64_t seed,
           std::ostream& out) {
  TypedProgram tp = load_program(file);
  EvalOutcome o = eval_all(tp, parse_inputs(inputs, tp.program), fuel);
  if (sample) {
    if (o.values.empty()) throw CliFailure{kRejected, "no value to sample"};
    std::mt19937_64 rng(seed);
    auto it = o.values.begin();
    std::advance(it, std::uniform_int_distribution<std::size_t>(
                         0, o.values.size() - 1)(rng));
    out << pretty_print(*it) << "\n";
  } else {
    for (const auto& v : o.values) out << pretty_print(v) << "\n";
  }
  out << "#exhausted: " << (o.exhausted ? "yes" : "no") << "\n";
  return kOk;
}

int do_tabulate(const std::string& file, const std::vector<std::string>& inputs,
                const std::string& mode_flag, const std::string& metric_flag,
                int k, const std::string& engine_flag, std::ostream& out) {
  TypedProgram tp = load_program(file);
  AnalysisReport report = analyze(tp);
  ExtMode mode = mode_flag == "det"      ? ExtMode::Deterministic
                 : mode_flag == "nondet" ? ExtMode::Nondeterministic
                 : report.deterministic  ? ExtMode::Deterministic
                                         : ExtMode::Nondeterministic;
  TabMetric metric =
      metric_flag == "depth" ? TabMetric::Depth : TabMetric::Order;
  if (k < 0) {
    k = metric == TabMetric::Order ? report.data_order
                                   : report.data_arrow_depth;
  }
  TabulateOptions options;
  if (engine_flag == "naive") options.engine = TabEngine::Naive;
  ValueSet got =
      tabulate(tp, parse_inputs(inputs, tp.program), mode, metric, k, options);
  for (const auto& v : got) out << pretty_print(v) << "\n";
  return kOk;
}

int do_transform(const std::string& file, const std::string& mode_flag, int k,
                 int check_equiv, std::ostream& out, std::ostream& err) {
  TypedProgram tp = load_program(file);
  Properness props;
  props.k = k;
  props.mode = mode_flag == "depth"     ? Properness::Mode::DepthAtMost
               : mode_flag == "unitary" ? Properness::Mode::RecursivelyUnitary
                                        : Properness::Mode::OrderAtMost;
  TypedProgram norm = normalize(tp, props);
  check_normalized(norm, props);
  out << pretty_print(norm.program);
  if (check_equiv > 0) {
    // Exhaustive comparison of outcome sets on all small data inputs.
    std::vector<std::vector<ValuePtr>> tuples = {{}};
    for (const auto& at : tp.main_arg_types) {
      std::vector<ValuePtr> vs;
      enum_data(tp.program, at, check_equiv, vs);
      std::vector<std::vector<ValuePtr>> next;
      for (const auto& tup : tuples) {
        for (const auto& v : vs) {
          auto ext = tup;
          ext.push_back(v);
          next.push_back(std::move(ext));
        }
      }
      tuples = std::move(next);
    }
    int checked = 0;
    for (const auto& tup : tuples) {
      EvalOutcome a = eval_all(tp, tup, 2048);
      EvalOutcome b = eval_all(norm, tup, 2048);
      if (!a.exhausted || !b.exhausted) continue;
      ++checked;
      bool same = a.values.size() == b.values.size() &&
                  std::equal(a.values.begin(), a.values.end(),
                             b.values.begin(), value_equal);
      if (!same) {
        std::string where;
        for (const auto& v : tup) where += " " + pretty_print(v);
        throw CliFailure{kRejected,
                         "transformed program disagrees on input" + where};
      }
    }
    err << "#equivalent on " << checked << " exhausted input tuples\n";
  }
  return kOk;
}

int do_compile_tm(const std::string& file, int a, int b, int k,
                  const std::string& out_path, std::ostream& out) {
  Program prog = compile_tm(parse_tm(read_file(file)), a, b, k);
  write_output(out_path, pretty_print(prog), out);
  return kOk;
}

int do_gen_counter(const std::string& kind, int a, int b, int levels,
                   const std::string& out_path, std::ostream& out,
                   std::ostream& err) {
  CountingModule m = gen_count_poly(a, b);
  if (kind == "exp") {
    for (int i = 0; i < levels; ++i) m = gen_count_exp(m);
  } else if (kind == "nondet") {
    m = gen_count_nondet(m);
  }
  err << "#counting up to " << m.bound_description << ", data order "
      << m.data_order << "\n";
  write_output(out_path, pretty_print(counting_module_program(m)), out);
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Analyses, transformations and tabulation for cons-free "
               "programs"};
  app.name("consfree");
  app.require_subcommand(1);

  std::string file, out_path;
  std::vector<std::string> inputs;
  std::uint64_t fuel = 1024;
  std::uint64_t seed = 0;
  bool have_seed = false;
  std::string mode_flag, metric_flag = "order", engine_flag = "demand";
  std::string tmode_flag = "order", kind;
  int k = -1, tk = 0, check_equiv = 0;
  int ca = 1, cb = 1, levels = 1;

  CLI::App* check = app.add_subcommand("check", "Parse and type-check a .cf "
                                                "program");
  check->add_option("file", file, ".cf program")->required();

  CLI::App* an = app.add_subcommand("analyze", "Report cons-freeness, "
                                               "determinism and metrics");
  an->add_option("file", file, ".cf program")->required();

  CLI::App* run = app.add_subcommand("run", "Enumerate program outcomes with "
                                            "fuel-bounded evaluation");
  run->add_option("file", file, ".cf program")->required();
  run->add_option("inputs", inputs, "data literals for the entry point");
  run->add_option("--fuel", fuel, "derivation depth bound (default 1024)");
  CLI::Option* seed_opt = run->add_option(
      "--sample-seed", seed, "print a single outcome chosen by this seed");

  CLI::App* tab = app.add_subcommand("tabulate", "Compute the exact outcome "
                                                 "set without evaluation");
  tab->add_option("file", file, ".cf program")->required();
  tab->add_option("inputs", inputs, "data literals for the entry point");
  tab->add_option("--mode", mode_flag, "det or nondet (default: inferred)")
      ->check(CLI::IsMember({"det", "nondet"}));
  tab->add_option("--metric", metric_flag, "order or depth (default order)")
      ->check(CLI::IsMember({"order", "depth"}));
  tab->add_option("-k,--bound", k,
                  "metric bound (default: the program's own data metric)");
  tab->add_option("--engine", engine_flag,
                  "demand (default) or naive statement saturation")
      ->check(CLI::IsMember({"demand", "naive"}));

  CLI::App* tr = app.add_subcommand("transform", "Normalize a program to the "
                                                 "bounded-metric fragment");
  tr->add_option("file", file, ".cf program")->required();
  tr->add_option("--mode", tmode_flag, "order, depth or unitary")
      ->check(CLI::IsMember({"order", "depth", "unitary"}));
  tr->add_option("-k,--bound", tk, "metric bound (default 0)");
  tr->add_option("--check-equiv", check_equiv,
                 "verify outcome preservation on data inputs up to this size");

  CLI::App* ct = app.add_subcommand("compile-tm", "Compile a .tm machine to "
                                                  "a cons-free program");
  ct->add_option("file", file, ".tm machine")->required();
  ct->add_option("-a", ca, "coefficient of the step bound a*(n+1)^b")
      ->required();
  ct->add_option("-b", cb, "exponent of the step bound")->required();
  ct->add_option("-k", tk, "number of exponential wrappings (data order)")
      ->required();
  ct->add_option("-o,--output", out_path, "output .cf file (default stdout)");

  CLI::App* gc = app.add_subcommand("gen-counter", "Emit a counting module "
                                                   "as a runnable program");
  gc->add_option("kind", kind, "poly, exp or nondet")
      ->required()
      ->check(CLI::IsMember({"poly", "exp", "nondet"}));
  gc->add_option("-a", ca, "polynomial coefficient (default 1)");
  gc->add_option("-b", cb, "polynomial exponent (default 1)");
  gc->add_option("--levels", levels, "exponential wrappings (default 1)");
  gc->add_option("-o,--output", out_path, "output .cf file (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    have_seed = seed_opt->count() > 0;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*check) return do_check(file, out);
    if (*an) return do_analyze(file, out);
    if (*run) return do_run(file, inputs, fuel, have_seed, seed, out);
    if (*tab) {
      return do_tabulate(file, inputs, mode_flag, metric_flag, k, engine_flag,
                         out);
    }
    if (*tr) return do_transform(file, tmode_flag, tk, check_equiv, out, err);
    if (*ct) return do_compile_tm(file, ca, cb, tk, out_path, out);
    if (*gc) return do_gen_counter(kind, ca, cb, levels, out_path, out, err);
  } catch (const CliFailure& f) {
    err << "error: " << f.message << "\n";
    return f.code;
  } catch (const ParseError& e) {
    err << "parse error (line " << e.line() << "): " << e.what() << "\n";
    return kUsage;
  } catch (const TypeError& e) {
    err << "type error: " << e.what() << "\n";
    return kRejected;
  } catch (const TransformError& e) {
    err << "transform rejected: " << e.what() << "\n";
    return kRejected;
  } catch (const ExtensionalError& e) {
    err << "tabulation rejected: " << e.what() << "\n";
    return kRejected;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace consfree
