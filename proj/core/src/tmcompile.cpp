#include "consfree/tmcompile.hpp"

#include <cassert>
#include <sstream>

namespace consfree {

namespace {

bool valid_word(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) {
      return false;
    }
  }
  return true;
}

bool is_halting(const std::string& state) {
  return state == "accept" || state == "reject";
}

// Semantic validation shared by parse_tm and compile_tm.
void validate_tm(const TmSpec& tm, int line) {
  auto err = [&](const std::string& m) { throw ParseError(m, line, 1); };
  std::set<std::string> alpha(tm.alphabet.begin(), tm.alphabet.end());
  std::set<std::string> states(tm.states.begin(), tm.states.end());
  if (alpha.size() != tm.alphabet.size()) err("duplicate alphabet symbol");
  if (states.size() != tm.states.size()) err("duplicate state");
  for (const char* required : {"0", "1", "_"}) {
    if (!alpha.count(required)) {
      err(std::string("alphabet must contain '") + required + "'");
    }
  }
  for (const char* required : {"start", "accept", "reject"}) {
    if (!states.count(required)) {
      err(std::string("states must contain '") + required + "'");
    }
  }
  for (const auto& [key, tr] : tm.transitions) {
    const auto& [from, read] = key;
    if (!states.count(from)) err("unknown state '" + from + "'");
    if (is_halting(from)) err("transition out of halting state '" + from + "'");
    if (!alpha.count(read)) err("unknown symbol '" + read + "'");
    if (!alpha.count(tr.write)) err("unknown symbol '" + tr.write + "'");
    if (tr.direction != 'L' && tr.direction != 'R') {
      err("direction must be L or R");
    }
    if (!states.count(tr.next)) err("unknown state '" + tr.next + "'");
  }
  for (const auto& s : tm.states) {
    if (is_halting(s)) continue;
    for (const auto& a : tm.alphabet) {
      if (!tm.transitions.count({s, a})) {
        err("missing transition for state '" + s + "' reading '" + a + "'");
      }
    }
  }
}

}  // namespace

TmSpec parse_tm(const std::string& text) {
  TmSpec tm;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool saw_alphabet = false, saw_states = false;
  auto err = [&](const std::string& m) { throw ParseError(m, lineno, 1); };
  auto check_word = [&](const std::string& w) {
    if (w != "_" && !valid_word(w)) {
      err("invalid name '" + w + "' (lowercase letters, digits, '_')");
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (!saw_alphabet) {
      if (tok[0] != "alphabet:") err("expected 'alphabet:' line");
      for (size_t i = 1; i < tok.size(); ++i) {
        check_word(tok[i]);
        tm.alphabet.push_back(tok[i]);
      }
      saw_alphabet = true;
    } else if (!saw_states) {
      if (tok[0] != "states:") err("expected 'states:' line");
      for (size_t i = 1; i < tok.size(); ++i) {
        check_word(tok[i]);
        tm.states.push_back(tok[i]);
      }
      saw_states = true;
    } else {
      if (tok.size() != 6 || tok[2] != "->") {
        err("expected '<state> <symbol> -> <write> <L|R> <nextstate>'");
      }
      if (tok[4] != "L" && tok[4] != "R") err("direction must be L or R");
      auto key = std::make_pair(tok[0], tok[1]);
      if (tm.transitions.count(key)) {
        err("duplicate transition for state '" + tok[0] + "' reading '" +
            tok[1] + "'");
      }
      tm.transitions[key] = TmTransition{tok[3], tok[4][0], tok[5]};
    }
  }
  ++lineno;
  if (!saw_alphabet) err("missing 'alphabet:' line");
  if (!saw_states) err("missing 'states:' line");
  validate_tm(tm, lineno);
  return tm;
}

TmResult run_tm(const TmSpec& tm, const std::vector<bool>& input,
                std::uint64_t max_steps) {
  std::vector<std::string> tape;
  tape.push_back("_");
  for (bool b : input) tape.push_back(b ? "1" : "0");
  std::size_t pos = 0;
  std::string state = "start";
  for (std::uint64_t step = 0; step < max_steps; ++step) {
    if (state == "accept") return TmResult::Accept;
    if (state == "reject") return TmResult::Reject;
    if (pos >= tape.size()) tape.resize(pos + 1, "_");
    const TmTransition& tr = tm.transitions.at({state, tape[pos]});
    tape[pos] = tr.write;
    pos = tr.direction == 'L' ? (pos == 0 ? 0 : pos - 1) : pos + 1;
    state = tr.next;
  }
  if (state == "accept") return TmResult::Accept;
  if (state == "reject") return TmResult::Reject;
  return TmResult::Timeout;
}

// ---------------------------------------------------------------------------
// Counting modules.
// ---------------------------------------------------------------------------

namespace {

std::string module_text(const CountingModule& m) {
  std::ostringstream os;
  for (const auto& [name, ty] : m.signatures) {
    os << name << " : " << pretty_print(ty) << "\n";
  }
  for (const auto& c : m.clauses) os << pretty_print(c) << "\n";
  return os.str();
}

// Parses the accumulated text and installs the structured declarations.
void reparse_into(CountingModule& m, const std::string& text) {
  Program p = parse_program(text);
  m.signatures = p.fun_sigs;
  m.clauses = p.clauses;
}

// Right-nested tuple syntax for a component list.
std::string tuple_of(const std::vector<std::string>& comps) {
  std::string out = comps.back();
  for (int i = static_cast<int>(comps.size()) - 2; i >= 0; --i) {
    out = "(" + comps[i] + ", " + out + ")";
  }
  return out;
}

// The number of leading exponential wrappings recorded in a tag, used to
// pick the next fresh level number.
int nesting_level(const std::string& tag) {
  int level = 0;
  std::size_t pos = 0;
  while (pos < tag.size() && tag[pos] == 'e') {
    std::size_t us = tag.find('_', pos);
    if (us == std::string::npos) break;
    ++level;
    pos = us + 1;
  }
  return level;
}

}  // namespace

CountingModule gen_count_poly(int a, int b) {
  if (a < 1 || b < 1) {
    throw std::invalid_argument("gen_count_poly requires a >= 1 and b >= 1");
  }
  CountingModule m;
  m.tag = "p" + std::to_string(a) + std::to_string(b);
  TypePtr list = sort_type("list");
  TypePtr alpha = list;
  for (int i = 0; i < b; ++i) alpha = pair_type(list, alpha);
  m.number_type = alpha;
  m.seed = "seed_" + m.tag;
  m.pred = "pred_" + m.tag;
  m.zero = "zero_" + m.tag;
  m.bound_description =
      std::to_string(a) + "*(n+1)^" + std::to_string(b);
  m.data_order = 0;

  std::string alist = "[]";
  for (int i = 1; i < a; ++i) alist = "false::" + alist;

  std::ostringstream os;
  os << m.seed << " : " << pretty_print(arrow_type(list, alpha)) << "\n";
  os << m.pred << " : "
     << pretty_print(arrow_type(list, arrow_type(alpha, alpha))) << "\n";
  os << m.zero << " : "
     << pretty_print(arrow_type(list, arrow_type(alpha, sort_type("bool"))))
     << "\n";

  // Digits are read most-significant first: the tuple (d0, .., db) stands
  // for sum |di| * (n+1)^(b-i), with |d0| < a and |di| <= n otherwise.
  std::vector<std::string> comps(b + 1, "cs");
  comps[0] = alist;
  os << m.seed << " cs = " << tuple_of(comps) << "\n";
  // One predecessor clause per position of the rightmost non-empty digit:
  // decrement it and reset every digit to its right to the maximum.
  for (int i = b; i >= 0; --i) {
    std::vector<std::string> pat(b + 1), body(b + 1);
    for (int j = 0; j <= b; ++j) {
      if (j < i) {
        pat[j] = "x" + std::to_string(j);
        body[j] = pat[j];
      } else if (j == i) {
        pat[j] = "y::ys";
        body[j] = "ys";
      } else {
        pat[j] = "[]";
        body[j] = "cs";
      }
    }
    os << m.pred << " cs " << tuple_of(pat) << " = " << tuple_of(body) << "\n";
    os << m.zero << " cs " << tuple_of(pat) << " = false\n";
  }
  std::vector<std::string> nils(b + 1, "[]");
  os << m.pred << " cs " << tuple_of(nils) << " = " << tuple_of(nils) << "\n";
  os << m.zero << " cs " << tuple_of(nils) << " = true\n";

  reparse_into(m, os.str());
  return m;
}

CountingModule extend_succ_equal(CountingModule m) {
  if (!m.equal.empty()) return m;
  const std::string t = m.tag;
  m.succ = "succ_" + t;
  m.equal = "equal_" + t;
  const std::string sc = "sc_" + t;
  TypePtr list = sort_type("list"), boolean = sort_type("bool");
  TypePtr alpha = m.number_type;

  std::ostringstream os;
  os << module_text(m);
  os << m.succ << " : "
     << pretty_print(arrow_type(list, arrow_type(alpha, alpha))) << "\n";
  os << sc << " : "
     << pretty_print(arrow_type(list, arrow_type(alpha, arrow_type(alpha,
                                                                   alpha))))
     << "\n";
  os << m.equal << " : "
     << pretty_print(arrow_type(list, arrow_type(alpha, arrow_type(alpha,
                                                                   boolean))))
     << "\n";
  // Successor by downward search: the successor of i is the j whose
  // predecessor equals i.
  os << m.succ << " cs i = " << sc << " cs (" << m.seed << " cs) i\n";
  os << sc << " cs j i = if " << m.equal << " cs (" << m.pred
     << " cs j) i then j else " << sc << " cs (" << m.pred << " cs j) i\n";
  os << m.equal << " cs i j = if " << m.zero << " cs i then " << m.zero
     << " cs j else if " << m.zero << " cs j then false else " << m.equal
     << " cs (" << m.pred << " cs i) (" << m.pred << " cs j)\n";

  reparse_into(m, os.str());
  return m;
}

CountingModule gen_count_exp(const CountingModule& inner_in) {
  CountingModule inner =
      inner_in.equal.empty() ? extend_succ_equal(inner_in) : inner_in;
  CountingModule m;
  m.tag = "e" + std::to_string(nesting_level(inner.tag) + 1) + "_" + inner.tag;
  TypePtr list = sort_type("list"), boolean = sort_type("bool");
  TypePtr alpha = inner.number_type;
  TypePtr ae = arrow_type(alpha, boolean);
  m.number_type = ae;
  m.data_order = type_order(ae);
  m.bound_description = "2^(" + inner.bound_description + ")";
  auto name = [&](const char* base) { return std::string(base) + "_" + m.tag; };
  m.seed = name("seed");
  m.pred = name("pred");
  m.zero = name("zero");
  const std::string zhelp = name("zhelp"), phelp = name("phelp"),
                    flip = name("flip"), nt = name("not");

  std::ostringstream os;
  os << module_text(inner);
  auto sig = [&](const std::string& n, const TypePtr& ty) {
    os << n << " : " << pretty_print(ty) << "\n";
  };
  sig(m.seed, arrow_type(list, ae));
  sig(m.zero, arrow_type(list, arrow_type(ae, boolean)));
  sig(zhelp, arrow_type(list, arrow_type(ae, arrow_type(alpha, boolean))));
  sig(m.pred, arrow_type(list, arrow_type(ae, ae)));
  sig(phelp, arrow_type(list, arrow_type(ae, arrow_type(alpha, ae))));
  sig(flip, arrow_type(list, arrow_type(ae, arrow_type(alpha, ae))));
  sig(nt, arrow_type(boolean, boolean));

  // A number below 2^P(n) is the predicate holding exactly on the positions
  // of its one-bits, the inner number P(n)-1 naming the most significant.
  os << m.seed << " cs x = true\n";
  os << m.zero << " cs f = " << zhelp << " cs f (" << inner.seed << " cs)\n";
  os << zhelp << " cs f k = if f k then false else if " << inner.zero
     << " cs k then true else " << zhelp << " cs f (" << inner.pred
     << " cs k)\n";
  os << m.pred << " cs f = " << phelp << " cs f (" << inner.seed << " cs)\n";
  os << phelp << " cs f k = if f k then " << flip
     << " cs f k else if " << inner.zero << " cs k then " << m.seed
     << " cs else " << phelp << " cs (" << flip << " cs f k) (" << inner.pred
     << " cs k)\n";
  os << flip << " cs f k i = if " << inner.equal << " cs k i then " << nt
     << " (f i) else f i\n";
  os << nt << " x = if x then false else true\n";

  reparse_into(m, os.str());
  return m;
}

CountingModule gen_count_nondet(const CountingModule& inner_in) {
  if (inner_in.data_order > 1) {
    throw std::invalid_argument(
        "gen_count_nondet requires an inner module of data order at most 1");
  }
  CountingModule inner =
      inner_in.equal.empty() ? extend_succ_equal(inner_in) : inner_in;
  CountingModule m;
  m.tag =
      "er" + std::to_string(nesting_level(inner.tag) + 1) + "_" + inner.tag;
  TypePtr list = sort_type("list"), boolean = sort_type("bool");
  TypePtr alpha = inner.number_type;
  TypePtr aer = arrow_type(boolean, alpha);
  m.number_type = aer;
  m.data_order = type_order(aer);
  m.bound_description = "2^(" + inner.bound_description + "-1)";
  auto name = [&](const char* base) { return std::string(base) + "_" + m.tag; };
  m.seed = name("seed");
  m.pred = name("pred");
  m.zero = name("zero");
  const std::string base = name("base"), st1 = name("st1"), st0 = name("st0"),
                    bitset = name("bitset"), nul = name("nul"),
                    nulh = name("nulh"), seedh = name("seedh"),
                    zeroh = name("zeroh"), pr = name("pr"), cp = name("cp");

  std::ostringstream os;
  os << module_text(inner);
  auto sig = [&](const std::string& n, const TypePtr& ty) {
    os << n << " : " << pretty_print(ty) << "\n";
  };
  sig(base, arrow_type(alpha, arrow_type(boolean, alpha)));
  sig(st1, arrow_type(alpha, arrow_type(aer, aer)));
  sig(st0, arrow_type(alpha, arrow_type(aer, aer)));
  sig(bitset, arrow_type(list, arrow_type(aer, arrow_type(alpha, boolean))));
  sig(nul, arrow_type(list, alpha));
  sig(nulh, arrow_type(list, arrow_type(alpha, alpha)));
  sig(m.seed, arrow_type(list, aer));
  sig(seedh, arrow_type(list, arrow_type(alpha, arrow_type(aer, aer))));
  sig(m.zero, arrow_type(list, arrow_type(aer, boolean)));
  sig(zeroh, arrow_type(list, arrow_type(aer, arrow_type(alpha, boolean))));
  sig(m.pred, arrow_type(list, arrow_type(aer, aer)));
  sig(pr, arrow_type(list, arrow_type(aer, arrow_type(alpha,
                                                      arrow_type(aer, aer)))));
  sig(cp, arrow_type(list, arrow_type(aer, arrow_type(alpha,
                                                      arrow_type(aer, aer)))));

  // A number below 2^(P(n)-1) is a function from booleans to inner numbers:
  // applied to true it may yield exactly the positions of the one-bits,
  // applied to false exactly the zero-bits (position P(n)-1 is the most
  // significant; position 0 is claimed on both sides).  The bit test loops
  // forever on every wrong guess, so it has exactly one derivable result.
  os << base << " x y = x\n";
  os << st1 << " n f true = choose(n, f true)\n";
  os << st1 << " n f false = f false\n";
  os << st0 << " n f true = f true\n";
  os << st0 << " n f false = choose(n, f false)\n";
  os << bitset << " cs f i = if " << inner.equal
     << " cs (f true) i then true else if " << inner.equal
     << " cs (f false) i then false else " << bitset << " cs f i\n";
  os << nul << " cs = " << nulh << " cs (" << inner.seed << " cs)\n";
  os << nulh << " cs n = if " << inner.zero << " cs n then n else " << nulh
     << " cs (" << inner.pred << " cs n)\n";
  os << m.seed << " cs = " << seedh << " cs (" << inner.seed << " cs) ("
     << base << " (" << nul << " cs))\n";
  os << seedh << " cs i f = if " << inner.zero << " cs i then f else " << seedh
     << " cs (" << inner.pred << " cs i) (" << st1 << " i f)\n";
  os << m.zero << " cs f = " << zeroh << " cs f (" << inner.seed << " cs)\n";
  os << zeroh << " cs f i = if " << inner.zero << " cs i then true else if "
     << bitset << " cs f i then false else " << zeroh << " cs f ("
     << inner.pred << " cs i)\n";
  os << m.pred << " cs f = " << pr << " cs f (" << inner.seed << " cs) ("
     << base << " (" << nul << " cs))\n";
  // Walk from the most significant bit looking for the lowest one-bit; on
  // the way record the bits above it, clear it, and set everything below.
  os << pr << " cs f i g = if " << bitset << " cs f i then " << cp
     << " cs f (" << inner.pred << " cs i) (" << st0 << " i g) else " << pr
     << " cs f (" << inner.pred << " cs i) (" << st1 << " i g)\n";
  os << cp << " cs f i g = if " << inner.zero << " cs i then g else if "
     << bitset << " cs f i then " << cp << " cs f (" << inner.pred
     << " cs i) (" << st1 << " i g) else " << cp << " cs f (" << inner.pred
     << " cs i) (" << st0 << " i g)\n";

  reparse_into(m, os.str());
  return m;
}

Program counting_module_program(const CountingModule& m, int preds) {
  std::ostringstream os;
  os << "camain : list => bool\n";
  for (const auto& [name, ty] : m.signatures) {
    os << name << " : " << pretty_print(ty) << "\n";
  }
  std::string num = m.seed + " cs";
  for (int i = 0; i < preds; ++i) num = m.pred + " cs (" + num + ")";
  os << "camain cs = " << m.zero << " cs (" << num << ")\n";
  for (const auto& c : m.clauses) os << pretty_print(c) << "\n";
  return parse_program(os.str());
}

// ---------------------------------------------------------------------------
// Compilation.
// ---------------------------------------------------------------------------

namespace {

std::string sym_ctor(const std::string& s) {
  if (s == "0") return "c0";
  if (s == "1") return "c1";
  if (s == "_") return "blank";
  return "sym_" + s;
}

std::string st_ctor(const std::string& s) { return "st_" + s; }

}  // namespace

Program compile_tm(const TmSpec& tm, int a, int b, int k) {
  if (k < 0) throw std::invalid_argument("compile_tm requires k >= 0");
  validate_tm(tm, 0);

  CountingModule m = gen_count_poly(a, b);
  for (int i = 0; i < k; ++i) m = gen_count_exp(m);
  m = extend_succ_equal(m);

  TypePtr list = sort_type("list"), boolean = sort_type("bool");
  TypePtr symbol = sort_type("symbol"), direc = sort_type("direc");
  TypePtr state = sort_type("state"), trans = sort_type("trans");
  TypePtr num = m.number_type;

  std::ostringstream os;
  os << "data symbol =";
  for (size_t i = 0; i < tm.alphabet.size(); ++i) {
    os << (i ? " | " : " ") << sym_ctor(tm.alphabet[i]);
  }
  os << "\ndata direc = dl | dr\n";
  os << "data state =";
  for (size_t i = 0; i < tm.states.size(); ++i) {
    os << (i ? " | " : " ") << st_ctor(tm.states[i]);
  }
  os << "\ndata trans = action symbol direc state | tmend state\n";

  auto sig = [&](const std::string& n, const TypePtr& ty) {
    os << n << " : " << pretty_print(ty) << "\n";
  };
  auto fn1 = [&](TypePtr r) { return arrow_type(list, r); };
  auto fn2 = [&](TypePtr x, TypePtr r) {
    return arrow_type(list, arrow_type(x, r));
  };
  sig("run", fn1(boolean));
  sig("test", arrow_type(state, boolean));
  sig("transition", arrow_type(state, arrow_type(symbol, trans)));
  sig("state", fn2(num, state));
  sig("transat", fn2(num, trans));
  sig("get1", arrow_type(trans, symbol));
  sig("get2", arrow_type(trans, direc));
  sig("get3", arrow_type(trans, state));
  sig("tapesymb", fn2(num, symbol));
  sig("tape", fn2(num, arrow_type(num, symbol)));
  sig("tapehelp", fn2(num, arrow_type(num, arrow_type(num, symbol))));
  sig("pos", fn2(num, num));
  sig("adjust", fn2(num, arrow_type(direc, num)));
  sig("inputtape", fn2(num, symbol));
  sig("nth", fn2(list, arrow_type(num, symbol)));
  sig("bit", arrow_type(boolean, symbol));
  sig("nul", fn1(num));
  sig("nulh", fn2(num, num));
  for (const auto& [name, ty] : m.signatures) sig(name, ty);

  const std::string &SEED = m.seed, &PRED = m.pred, &ZERO = m.zero,
                    &SUCC = m.succ, &EQUAL = m.equal;
  // The counter runs over time steps and tape positions up to the seed; the
  // machine's configuration at each step is recomputed on demand.
  os << "run cs = test (state cs (" << SEED << " cs))\n";
  os << "test " << st_ctor("accept") << " = true\n";
  os << "test " << st_ctor("reject") << " = false\n";
  for (const auto& [key, tr] : tm.transitions) {
    os << "transition " << st_ctor(key.first) << " " << sym_ctor(key.second)
       << " = action " << sym_ctor(tr.write) << " "
       << (tr.direction == 'L' ? "dl" : "dr") << " " << st_ctor(tr.next)
       << "\n";
  }
  // Halting states stay put so that the configuration is stable from the
  // halting step up to the seed.
  os << "transition " << st_ctor("accept") << " x = tmend "
     << st_ctor("accept") << "\n";
  os << "transition " << st_ctor("reject") << " x = tmend "
     << st_ctor("reject") << "\n";
  os << "state cs n = if " << ZERO << " cs n then " << st_ctor("start")
     << " else get3 (transat cs (" << PRED << " cs n))\n";
  os << "transat cs n = transition (state cs n) (tapesymb cs n)\n";
  os << "get1 (action x y z) = x\n";
  os << "get1 (tmend x) = blank\n";
  os << "get2 (action x y z) = y\n";
  os << "get2 (tmend x) = dr\n";
  os << "get3 (action x y z) = z\n";
  os << "get3 (tmend x) = x\n";
  os << "tapesymb cs n = tape cs n (pos cs n)\n";
  os << "tape cs n p = if " << ZERO
     << " cs n then inputtape cs p else tapehelp cs n p (pos cs (" << PRED
     << " cs n))\n";
  os << "tapehelp cs n p i = if " << EQUAL
     << " cs p i then get1 (transat cs (" << PRED << " cs n)) else tape cs ("
     << PRED << " cs n) p\n";
  os << "pos cs n = if " << ZERO
     << " cs n then nul cs else adjust cs (pos cs (" << PRED
     << " cs n)) (get2 (transat cs (" << PRED << " cs n)))\n";
  // A left move at position zero stays in place (the predecessor of zero is
  // zero in the polynomial module, and positions never reach zero again
  // after the first step for machines that stay on the tape).
  os << "adjust cs p dl = " << PRED << " cs p\n";
  os << "adjust cs p dr = " << SUCC << " cs p\n";
  os << "inputtape cs p = if " << ZERO
     << " cs p then blank else nth cs cs (" << PRED << " cs p)\n";
  os << "nth cs [] p = blank\n";
  os << "nth cs (x::xs) p = if " << ZERO << " cs p then bit x else nth cs xs ("
     << PRED << " cs p)\n";
  os << "bit true = c1\n";
  os << "bit false = c0\n";
  os << "nul cs = nulh cs (" << SEED << " cs)\n";
  os << "nulh cs n = if " << ZERO << " cs n then n else nulh cs (" << PRED
     << " cs n)\n";
  for (const auto& c : m.clauses) os << pretty_print(c) << "\n";

  return parse_program(os.str());
}

}  // namespace consfree
