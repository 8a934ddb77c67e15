#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "consfree/cli.hpp"

using namespace consfree;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// A scratch directory holding the fixture files for one test run.
class Fixtures {
 public:
  Fixtures() {
    dir_ = std::filesystem::temp_directory_path() /
           ("consfree-cli-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }
  ~Fixtures() { std::filesystem::remove_all(dir_); }

  std::string file(const std::string& name, const std::string& text) {
    std::string path = (dir_ / name).string();
    std::ofstream(path) << text;
    return path;
  }
  std::string path(const std::string& name) { return (dir_ / name).string(); }

 private:
  std::filesystem::path dir_;
};

const char* const kSucc =
    "succ : list => list\n"
    "succ [] = []\n"
    "succ (x::xs) = if x then false::(succ xs) else true::xs\n";

const char* const kChoose =
    "main : bool => bool => bool\n"
    "main x y = choose(x, y)\n";

const char* const kFsucc =
    "start : list => bool\n"
    "fsucc : (list => bool) => list => list => bool\n"
    "set : (list => bool) => list => bool => list => bool\n"
    "tl : list => list\n"
    "eqlen : list => list => bool\n"
    "start xs = fsucc (eqlen xs) xs xs\n"
    "fsucc f [] = if f [] then set f [] false else set f [] true\n"
    "fsucc f xs = if f xs then fsucc (set f xs false) (tl xs) else set f xs "
    "true\n"
    "set f xs val ys = if eqlen xs ys then val else f ys\n"
    "tl (x::xs) = xs\n"
    "eqlen (x::xs) (y::ys) = eqlen xs ys\n"
    "eqlen [] [] = true\n"
    "eqlen xs ys = false\n";

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

}  // namespace

TEST_CASE("run prints outcomes one per line with the exhaustion marker") {
  Fixtures fx;
  std::string succ = fx.file("succ.cf", kSucc);
  CliResult r = cli({"run", succ, "true::false::true::[]"});
  CHECK(r.code == 0);
  CHECK(r.out == "false::true::true::[]\n#exhausted: yes\n");
  CHECK(r.err.empty());
  // Output is deterministic byte for byte.
  CHECK(cli({"run", succ, "true::false::true::[]"}).out == r.out);
}

TEST_CASE("run with a sample seed prints a single deterministic outcome") {
  Fixtures fx;
  std::string f = fx.file("choose.cf", kChoose);
  CliResult all = cli({"run", f, "true", "false"});
  CHECK(all.code == 0);
  CHECK(all.out == "false\ntrue\n#exhausted: yes\n");
  CliResult once = cli({"run", f, "true", "false", "--sample-seed", "7"});
  CHECK(once.code == 0);
  CHECK(once.out ==
        cli({"run", f, "true", "false", "--sample-seed", "7"}).out);
  // Exactly one value line plus the marker.
  CHECK(std::count(once.out.begin(), once.out.end(), '\n') == 2);
}

TEST_CASE("analyze reports the stable key lines") {
  Fixtures fx;
  CliResult r = cli({"analyze", fx.file("fsucc.cf", kFsucc)});
  CHECK(r.code == 0);
  CHECK(r.out ==
        "cons_free: yes\ndeterministic: yes\ndata_order: 1\n"
        "arrow_depth: 1\nunitary: yes\n");
}

TEST_CASE("tabulate prints the exact outcome set") {
  Fixtures fx;
  std::string f = fx.file("choose.cf", kChoose);
  CliResult r = cli({"tabulate", f, "true", "false", "--mode", "nondet"});
  CHECK(r.code == 0);
  CHECK(r.out == "false\ntrue\n");
  // Mode is inferred from the determinism analysis when not given.
  CHECK(cli({"tabulate", f, "true", "false"}).out == "false\ntrue\n");
  // The naive engine computes the same set.
  CHECK(cli({"tabulate", f, "true", "false", "--engine", "naive"}).out ==
        "false\ntrue\n");
  // Deterministic mode on a choice program is an analysis rejection.
  CliResult det = cli({"tabulate", f, "true", "false", "--mode", "det"});
  CHECK(det.code == 1);
  CHECK(det.out.empty());
}

TEST_CASE("tabulate rejects programs that build data") {
  Fixtures fx;
  CliResult r = cli({"tabulate", fx.file("succ.cf", kSucc), "true::[]"});
  CHECK(r.code == 1);
  CHECK(r.err.find("builds no data") != std::string::npos);
}

TEST_CASE("check distinguishes parse errors, type errors and success") {
  Fixtures fx;
  CHECK(cli({"check", fx.file("ok.cf", kSucc)}).code == 0);
  CHECK(cli({"check", fx.file("ok.cf", kSucc)}).out == "ok\n");
  CHECK(cli({"check", fx.path("missing.cf")}).code == 2);
  CHECK(cli({"check", fx.file("bad.cf", "f : list\n")}).code == 2);
  // Well-formed syntax, ill-typed clause.
  CHECK(cli({"check", fx.file("illtyped.cf",
                              "f : list => bool\nf xs = xs\n")})
            .code == 1);
}

TEST_CASE("transform emits the normalized program and can verify it") {
  Fixtures fx;
  std::string f = fx.file("fsucc.cf", kFsucc);
  CliResult r = cli({"transform", f, "--mode", "order", "-k", "1",
                     "--check-equiv", "3"});
  CHECK(r.code == 0);
  CHECK(r.out.find("start") != std::string::npos);
  CHECK(r.err.find("#equivalent on") != std::string::npos);
  // A bound below the program's own data metric is a rejection.
  CliResult low = cli({"transform", f, "--mode", "order", "-k", "0"});
  CHECK(low.code == 1);
  CHECK(low.err.find("exceeds the bound") != std::string::npos);
}

TEST_CASE("compile-tm and gen-counter emit checkable programs") {
  Fixtures fx;
  std::string tm = fx.file("parity.tm", kParityTm);
  std::string out = fx.path("parity.cf");
  CHECK(cli({"compile-tm", tm, "-a", "2", "-b", "1", "-k", "0", "-o", out})
            .code == 0);
  CHECK(cli({"check", out}).code == 0);
  // Three ones: odd parity, accepted.
  CHECK(cli({"tabulate", out, "true::true::true::[]"}).out == "true\n");
  CHECK(cli({"tabulate", out, "true::true::[]"}).out == "false\n");

  std::string counter = fx.path("counter.cf");
  CliResult gc = cli({"gen-counter", "poly", "-a", "2", "-b", "1", "-o",
                      counter});
  CHECK(gc.code == 0);
  CHECK(gc.err.find("2*(n+1)^1") != std::string::npos);
  CHECK(cli({"check", counter}).code == 0);
  CHECK(cli({"run", counter, "true::[]"}).out == "false\n#exhausted: yes\n");
  CHECK(cli({"gen-counter", "nondet", "-o", fx.path("er.cf")}).code == 0);
  CHECK(cli({"check", fx.path("er.cf")}).code == 0);
  // An invalid machine is a parse error.
  std::string broken = fx.file("broken.tm",
                               "alphabet: 0 1 _\nstates: start accept "
                               "reject\nstart 0 -> 0 R accept\n");
  CHECK(cli({"compile-tm", broken, "-a", "1", "-b", "1", "-k", "0"}).code ==
        2);
}

TEST_CASE("usage errors exit with code two and help succeeds") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"tabulate"}).code == 2);  // missing required file
  Fixtures fx;
  std::string f = fx.file("choose.cf", kChoose);
  CHECK(cli({"tabulate", f, "true", "--mode", "sideways"}).code == 2);
  CliResult help = cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("tabulate") != std::string::npos);
}
