#pragma once

#include <memory>
#include <string_view>

#include "ttvi/common.hpp"

namespace ttvi {

/// Formula AST. Negation appears only on atoms; True/False arise internally
/// from derivative simplification and have no surface syntax.
struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum class Kind { True, False, Atom, NotAtom, And, Or, Next, Until };

  Kind kind = Kind::True;
  std::size_t atom = npos;            // Atom / NotAtom
  std::vector<FormulaPtr> children;   // And/Or: >= 2, sorted; Next: 1; Until: 2
  std::string key;                    // canonical serialization, used for state merging
};

FormulaPtr make_true();
FormulaPtr make_false();
FormulaPtr make_atom(std::size_t ap);
FormulaPtr make_not_atom(std::size_t ap);
FormulaPtr make_and(std::vector<FormulaPtr> parts);
FormulaPtr make_or(std::vector<FormulaPtr> parts);
FormulaPtr make_next(FormulaPtr f);
FormulaPtr make_until(FormulaPtr lhs, FormulaPtr rhs);

/// Parse the ASCII syntax `p`, `!p`, `&`, `|`, `X`, `U`, parentheses.
/// Precedence ! > & > | > U, with U right-associative and X prefix. Negation
/// may only be applied to atoms; atom names must appear in declared_aps.
FormulaPtr parse_formula(std::string_view text, const std::vector<std::string>& declared_aps);

std::string to_string(const FormulaPtr& f, const std::vector<std::string>& ap_names);

/// Complete deterministic automaton over the alphabet 2^AP with a single
/// accepting state that is absorbing. States index into the transition table.
struct Dfa {
  std::vector<std::string> ap_names;  // declaration order; letter bit i <-> ap_names[i]
  std::size_t n_states = 0;
  std::size_t initial = 0;
  std::size_t accepting = 0;
  std::vector<std::vector<std::uint32_t>> next;  // [state][letter]

  std::size_t n_letters() const { return std::size_t{1} << ap_names.size(); }
  std::size_t step(std::size_t q, Letter l) const { return next[q][l]; }
  /// Per state, whether the accepting state is reachable ("live" modes).
  std::vector<bool> can_reach_accepting() const;
};

/// Build the DFA by syntactic-derivative expansion: states are residual
/// formulas reduced to a canonical form, the accepting state is the True
/// residual (always materialized), False is the rejecting sink. Throws when
/// more than state_cap states are discovered.
Dfa to_dfa(const FormulaPtr& f, const std::vector<std::string>& ap_universe,
           std::size_t state_cap = kDefaultDfaStateCap);

/// Conjunction over the AP universe: each AP is required true, required false,
/// or free. Used as a disjoint guard on a DFA edge.
struct Conjunction {
  enum : std::uint8_t { kFree = 0, kTrue = 1, kFalse = 2 };
  std::vector<std::uint8_t> req;  // one entry per AP

  bool satisfied_by(Letter l) const {
    for (std::size_t i = 0; i < req.size(); ++i) {
      const bool bit = (l >> i) & 1u;
      if (req[i] == kTrue && !bit) return false;
      if (req[i] == kFalse && bit) return false;
    }
    return true;
  }
  std::string to_string(const std::vector<std::string>& ap_names) const;
};

struct GuardedEdge {
  Conjunction guard;
  std::size_t target = 0;
};

/// Outgoing transitions of every state, factored into pairwise-disjoint
/// conjunction guards whose union covers the whole alphabet.
struct OutgoingTransitions {
  std::vector<std::vector<GuardedEdge>> at;  // per state

  std::size_t conjunction_count(std::size_t q) const { return at[q].size(); }
};

/// Decompose each state's letter->successor map into disjoint conjunctions by
/// ordered decision splits over the APs in declaration order.
OutgoingTransitions factor_edges(const Dfa& dfa);

/// Structured-text DFA file: { "states": [names], "initial": name,
/// "accepting": name, "transitions": [{"from","to","guard"}] } with guards
/// over the declared APs using &, |, !, true. Validation (determinism,
/// completeness, single absorbing accepting state) is fatal.
Dfa load_dfa_file(const std::string& path, const std::vector<std::string>& ap_universe);
void save_dfa_file(const Dfa& dfa, const OutgoingTransitions& outgoing, const std::string& path);

/// Parse a plain Boolean guard expression (general negation allowed, plus the
/// literal `true`) and evaluate it over all letters of the universe; returns
/// a bitset-like vector indexed by letter.
std::vector<bool> guard_letters(std::string_view guard,
                                const std::vector<std::string>& ap_universe);

}  // namespace ttvi
