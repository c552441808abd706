#pragma once

#include <random>
#include <vector>

#include "ttvi/scltl.hpp"

namespace ttvi::testing {

// Finite-word semantics: everything is false beyond the end of the word, a
// next step needs the next position to exist, and an until needs its witness
// inside the word. Independent of the automaton construction.
inline bool bounded_sat(const FormulaPtr& f, const std::vector<Letter>& word, std::size_t t) {
  switch (f->kind) {
    case Formula::Kind::True:
      return true;
    case Formula::Kind::False:
      return false;
    case Formula::Kind::Atom:
      return t < word.size() && ((word[t] >> f->atom) & 1u);
    case Formula::Kind::NotAtom:
      return t < word.size() && !((word[t] >> f->atom) & 1u);
    case Formula::Kind::And:
      for (const auto& c : f->children)
        if (!bounded_sat(c, word, t)) return false;
      return true;
    case Formula::Kind::Or:
      for (const auto& c : f->children)
        if (bounded_sat(c, word, t)) return true;
      return false;
    case Formula::Kind::Next:
      return bounded_sat(f->children[0], word, t + 1);
    case Formula::Kind::Until:
      for (std::size_t i = t; i < word.size(); ++i) {
        if (bounded_sat(f->children[1], word, i)) return true;
        if (!bounded_sat(f->children[0], word, i)) return false;
      }
      return false;
  }
  return false;
}

inline bool dfa_accepts(const Dfa& dfa, const std::vector<Letter>& word) {
  std::size_t q = dfa.initial;
  if (q == dfa.accepting) return true;
  for (Letter l : word) {
    q = dfa.step(q, l);
    if (q == dfa.accepting) return true;
  }
  return false;
}

inline FormulaPtr random_formula(std::mt19937_64& rng, std::size_t depth, std::size_t n_aps) {
  std::uniform_int_distribution<std::size_t> ap(0, n_aps - 1);
  std::uniform_int_distribution<int> leaf(0, 1);
  if (depth == 0) return leaf(rng) == 0 ? make_atom(ap(rng)) : make_not_atom(ap(rng));
  std::uniform_int_distribution<int> kind(0, 5);
  switch (kind(rng)) {
    case 0:
      return make_atom(ap(rng));
    case 1:
      return make_not_atom(ap(rng));
    case 2:
      return make_and(
          {random_formula(rng, depth - 1, n_aps), random_formula(rng, depth - 1, n_aps)});
    case 3:
      return make_or(
          {random_formula(rng, depth - 1, n_aps), random_formula(rng, depth - 1, n_aps)});
    case 4:
      return make_next(random_formula(rng, depth - 1, n_aps));
    default:
      return make_until(random_formula(rng, depth - 1, n_aps),
                        random_formula(rng, depth - 1, n_aps));
  }
}

// Enumerates every word of length <= max_len and reports the first
// disagreement between the automaton and the bounded semantics; npos if none.
inline std::size_t count_language_mismatches(const Dfa& dfa, const FormulaPtr& f,
                                             std::size_t n_aps, std::size_t max_len) {
  const Letter n_letters = Letter{1} << n_aps;
  std::size_t mismatches = 0;
  std::vector<Letter> word;
  for (std::size_t len = 0; len <= max_len; ++len) {
    word.assign(len, 0);
    while (true) {
      if (dfa_accepts(dfa, word) != bounded_sat(f, word, 0)) ++mismatches;
      bool wrapped = true;
      for (std::size_t i = len; i-- > 0;) {
        if (++word[i] < n_letters) {
          wrapped = false;
          break;
        }
        word[i] = 0;
      }
      if (wrapped) break;
    }
  }
  return mismatches;
}

}  // namespace ttvi::testing
