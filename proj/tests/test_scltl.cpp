#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "support/bounded_scltl.hpp"
#include "ttvi/scltl.hpp"

using namespace ttvi;
using namespace ttvi::testing;

namespace {
const std::vector<std::string> kAps123{"p1", "p2", "p3"};
}

TEST_CASE("parser builds the case-study until formula") {
  FormulaPtr f = parse_formula("(!p2 & !p3) U p1", kAps123);
  REQUIRE(f->kind == Formula::Kind::Until);
  CHECK(f->children[0]->kind == Formula::Kind::And);
  CHECK(f->children[0]->children[0]->kind == Formula::Kind::NotAtom);
  CHECK(f->children[0]->children[1]->kind == Formula::Kind::NotAtom);
  CHECK(f->children[1]->kind == Formula::Kind::Atom);
  CHECK(f->children[1]->atom == 0);
}

TEST_CASE("parser accepts a bare atom") {
  FormulaPtr f = parse_formula("p1", kAps123);
  CHECK(f->kind == Formula::Kind::Atom);
  CHECK(f->atom == 0);
}

TEST_CASE("negation of a compound formula is a syntax error") {
  CHECK_THROWS_AS(parse_formula("!(p1 & p2)", kAps123), ParseError);
  CHECK_THROWS_AS(parse_formula("!!p1", kAps123), ParseError);
  try {
    parse_formula("!(p1 & p2)", kAps123);
  } catch (const ParseError& e) {
    CHECK(e.position() == 1);
  }
}

TEST_CASE("undeclared atoms are rejected with a position") {
  CHECK_THROWS_AS(parse_formula("p1 & q7", kAps123), ParseError);
  try {
    parse_formula("p1 & q7", kAps123);
  } catch (const ParseError& e) {
    CHECK(e.position() == 5);
  }
}

TEST_CASE("precedence: ! > & > | > U, right-associative U, prefix X") {
  // a | b & c U d  ==  (a | (b & c)) U d
  FormulaPtr f = parse_formula("p1 | p2 & p3 U p1", kAps123);
  REQUIRE(f->kind == Formula::Kind::Until);
  CHECK(f->children[0]->kind == Formula::Kind::Or);
  // a U b U c is a U (b U c)
  FormulaPtr g = parse_formula("p1 U p2 U p3", kAps123);
  REQUIRE(g->kind == Formula::Kind::Until);
  CHECK(g->children[0]->kind == Formula::Kind::Atom);
  CHECK(g->children[1]->kind == Formula::Kind::Until);
  // X binds to the next unary term
  FormulaPtr h = parse_formula("X p1 U p2", kAps123);
  REQUIRE(h->kind == Formula::Kind::Until);
  CHECK(h->children[0]->kind == Formula::Kind::Next);
  FormulaPtr nested = parse_formula("X (p1 U p2)", kAps123);
  CHECK(nested->kind == Formula::Kind::Next);
}

TEST_CASE("single-atom specification: q0 steps to accept on p1, else to the sink") {
  Dfa dfa = to_dfa(parse_formula("p1", {"p1"}), {"p1"});
  CHECK(dfa.n_states == 3);
  std::size_t on_true = dfa.step(dfa.initial, 1);
  std::size_t on_false = dfa.step(dfa.initial, 0);
  CHECK(on_true == dfa.accepting);
  CHECK(on_false != dfa.accepting);
  CHECK(on_false != dfa.initial);
  // both targets absorbing
  CHECK(dfa.step(on_true, 0) == on_true);
  CHECK(dfa.step(on_false, 1) == on_false);
  auto live = dfa.can_reach_accepting();
  CHECK(live[dfa.initial]);
  CHECK(!live[on_false]);
}

TEST_CASE("case-study DFA matches the bounded semantics on every word up to length 6") {
  FormulaPtr f = parse_formula("(!p2 & !p3) U p1", kAps123);
  Dfa dfa = to_dfa(f, kAps123);
  CHECK(dfa.n_states == 3);  // q0, accept, sink
  CHECK(count_language_mismatches(dfa, f, 3, 6) == 0);
}

TEST_CASE("step-bounded invariance chain has seven states plus the sink") {
  const std::vector<std::string> aps{"a1", "a2"};
  std::string conj = "(a1 & a2)";
  std::string psi = conj;
  for (int t = 0; t < 5; ++t) psi = "(" + conj + " & X " + psi + ")";
  FormulaPtr f = parse_formula(psi, aps);
  Dfa dfa = to_dfa(f, aps);
  CHECK(dfa.n_states == 8);
  CHECK(count_language_mismatches(dfa, f, 2, 7) == 0);
  // the good prefix needs all six observations
  std::vector<Letter> word(6, 3);
  CHECK(dfa_accepts(dfa, word));
  word[5] = 1;
  CHECK(!dfa_accepts(dfa, word));
  CHECK(!dfa_accepts(dfa, std::vector<Letter>(5, 3)));
}

TEST_CASE("random formulas agree with the bounded semantics oracle") {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 40; ++rep) {
    FormulaPtr f = random_formula(rng, 4, 3);
    Dfa dfa = to_dfa(f, kAps123);
    CHECK(count_language_mismatches(dfa, f, 3, 6) == 0);
  }
}

TEST_CASE("state cap aborts construction") {
  FormulaPtr f = parse_formula("(!p2 & !p3) U p1", kAps123);
  CHECK_THROWS_AS(to_dfa(f, kAps123, 2), std::runtime_error);
}

TEST_CASE("guard factoring: accept edge of the until is the single conjunction p1") {
  Dfa dfa = to_dfa(parse_formula("(!p2 & !p3) U p1", kAps123), kAps123);
  OutgoingTransitions out = factor_edges(dfa);
  std::vector<Conjunction> to_accept;
  for (const auto& e : out.at[dfa.initial])
    if (e.target == dfa.accepting) to_accept.push_back(e.guard);
  REQUIRE(to_accept.size() == 1);
  CHECK(to_accept[0].req[0] == Conjunction::kTrue);
  CHECK(to_accept[0].req[1] == Conjunction::kFree);
  CHECK(to_accept[0].req[2] == Conjunction::kFree);
  CHECK(to_accept[0].to_string(kAps123) == "p1");
}

TEST_CASE("guard factoring splits the negated conjunction into two disjoint parts") {
  const std::vector<std::string> aps{"g1", "g2"};
  Dfa dfa = to_dfa(parse_formula("(g1 | !g1) U (g1 & g2)", aps), aps);
  OutgoingTransitions out = factor_edges(dfa);
  std::vector<std::string> self_guards;
  for (const auto& e : out.at[dfa.initial])
    if (e.target == dfa.initial) self_guards.push_back(e.guard.to_string(aps));
  REQUIRE(self_guards.size() == 2);
  CHECK(self_guards[0] == "!g1");
  CHECK(self_guards[1] == "g1 & !g2");
}

TEST_CASE("a tautological guard is one conjunction with every proposition free") {
  Dfa dfa = to_dfa(parse_formula("p1", kAps123), kAps123);
  std::size_t sink = dfa.step(dfa.initial, 0);
  OutgoingTransitions out = factor_edges(dfa);
  REQUIRE(out.at[sink].size() == 1);
  for (auto r : out.at[sink][0].guard.req) CHECK(r == Conjunction::kFree);
  CHECK(out.at[sink][0].guard.to_string(kAps123) == "true");
}

TEST_CASE("per state, every letter satisfies exactly one conjunction") {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 25; ++rep) {
    FormulaPtr f = random_formula(rng, 4, 3);
    Dfa dfa = to_dfa(f, kAps123);
    OutgoingTransitions out = factor_edges(dfa);
    for (std::size_t q = 0; q < dfa.n_states; ++q) {
      for (Letter l = 0; l < dfa.n_letters(); ++l) {
        std::size_t hits = 0;
        std::size_t target = 0;
        for (const auto& e : out.at[q])
          if (e.guard.satisfied_by(l)) {
            ++hits;
            target = e.target;
          }
        CHECK(hits == 1);
        CHECK(target == dfa.step(q, l));
      }
    }
  }
}

TEST_CASE("DFA file round-trip preserves the language") {
  namespace fs = std::filesystem;
  Dfa dfa = to_dfa(parse_formula("(!p2 & !p3) U p1", kAps123), kAps123);
  OutgoingTransitions out = factor_edges(dfa);
  fs::path path = fs::temp_directory_path() / "ttvi_dfa_roundtrip.json";
  save_dfa_file(dfa, out, path.string());
  Dfa loaded = load_dfa_file(path.string(), kAps123);
  CHECK(loaded.n_states == dfa.n_states);
  // identical language over all words of length <= 4
  FormulaPtr f = parse_formula("(!p2 & !p3) U p1", kAps123);
  CHECK(count_language_mismatches(loaded, f, 3, 4) == 0);
  fs::remove(path);
}

TEST_CASE("DFA file validation failures are fatal") {
  namespace fs = std::filesystem;
  auto write_and_try = [](const std::string& body) {
    fs::path path = fs::temp_directory_path() / "ttvi_dfa_invalid.json";
    std::ofstream(path.string()) << body;
    bool threw = false;
    try {
      load_dfa_file(path.string(), {"a"});
    } catch (const std::exception&) {
      threw = true;
    }
    fs::remove(path);
    return threw;
  };
  // overlapping guards (nondeterministic)
  CHECK(write_and_try(R"({"states":["q0","acc"],"initial":"q0","accepting":"acc",
    "transitions":[{"from":"q0","to":"acc","guard":"a"},{"from":"q0","to":"q0","guard":"true"},
                   {"from":"acc","to":"acc","guard":"true"}]})"));
  // incomplete
  CHECK(write_and_try(R"({"states":["q0","acc"],"initial":"q0","accepting":"acc",
    "transitions":[{"from":"q0","to":"acc","guard":"a"},{"from":"acc","to":"acc","guard":"true"}]})"));
  // accepting not absorbing
  CHECK(write_and_try(R"({"states":["q0","acc"],"initial":"q0","accepting":"acc",
    "transitions":[{"from":"q0","to":"acc","guard":"true"},{"from":"acc","to":"q0","guard":"true"}]})"));
  // two accepting states
  CHECK(write_and_try(R"({"states":["q0","a1","a2"],"initial":"q0","accepting":["a1","a2"],
    "transitions":[]})"));
}

TEST_CASE("guard expressions over letters") {
  std::vector<bool> set = guard_letters("!(a & b) | c", {"a", "b", "c"});
  for (Letter l = 0; l < 8; ++l) {
    bool a = l & 1, b = l & 2, c = l & 4;
    CHECK(set[l] == (!(a && b) || c));
  }
  CHECK(guard_letters("true", {"a"}) == std::vector<bool>{true, true});
  CHECK_THROWS_AS(guard_letters("a |", {"a"}), ParseError);
}

TEST_CASE("valid external DFA loads and matches a hand trace") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "ttvi_dfa_ok.json";
  std::ofstream(path.string()) << R"({
    "states": ["scan", "acc", "dead"],
    "initial": "scan",
    "accepting": "acc",
    "transitions": [
      {"from": "scan", "to": "acc", "guard": "a & !b"},
      {"from": "scan", "to": "scan", "guard": "!a & !b"},
      {"from": "scan", "to": "dead", "guard": "b"},
      {"from": "acc", "to": "acc", "guard": "true"},
      {"from": "dead", "to": "dead", "guard": "true"}
    ]})";
  Dfa dfa = load_dfa_file(path.string(), {"a", "b"});
  CHECK(dfa.n_states == 3);
  CHECK(dfa.step(dfa.initial, 0) == dfa.initial);
  CHECK(dfa.step(dfa.initial, 1) == dfa.accepting);
  CHECK(dfa.step(dfa.initial, 2) != dfa.accepting);
  CHECK(dfa.step(dfa.initial, 3) != dfa.accepting);
  fs::remove(path);
}
