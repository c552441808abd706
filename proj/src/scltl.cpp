#include "ttvi/scltl.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <unordered_map>

#include "json.hpp"

namespace ttvi {

namespace {

FormulaPtr make_node(Formula::Kind kind, std::size_t atom, std::vector<FormulaPtr> children,
                     std::string key) {
  auto n = std::make_shared<Formula>();
  n->kind = kind;
  n->atom = atom;
  n->children = std::move(children);
  n->key = std::move(key);
  return n;
}

const FormulaPtr& true_singleton() {
  static FormulaPtr t = make_node(Formula::Kind::True, npos, {}, "T");
  return t;
}

const FormulaPtr& false_singleton() {
  static FormulaPtr f = make_node(Formula::Kind::False, npos, {}, "F");
  return f;
}

}  // namespace

FormulaPtr make_true() { return true_singleton(); }
FormulaPtr make_false() { return false_singleton(); }

FormulaPtr make_atom(std::size_t ap) {
  return make_node(Formula::Kind::Atom, ap, {}, "a" + std::to_string(ap));
}

FormulaPtr make_not_atom(std::size_t ap) {
  return make_node(Formula::Kind::NotAtom, ap, {}, "n" + std::to_string(ap));
}

namespace {

// Flatten + sort + dedupe n-ary boolean nodes so that equal residuals get
// equal keys. A conjunction containing p and !p collapses to False; the dual
// reduction of p|!p to True is deliberately not applied, since p|!p still
// requires one observed letter while True holds immediately.
FormulaPtr make_bool(Formula::Kind kind, std::vector<FormulaPtr> parts) {
  const bool is_and = kind == Formula::Kind::And;
  const FormulaPtr& unit = is_and ? true_singleton() : false_singleton();
  const FormulaPtr& zero = is_and ? false_singleton() : true_singleton();

  std::vector<FormulaPtr> flat;
  for (auto& p : parts) {
    if (p->kind == kind) {
      for (const auto& c : p->children) flat.push_back(c);
    } else {
      flat.push_back(std::move(p));
    }
  }
  std::sort(flat.begin(), flat.end(),
            [](const FormulaPtr& a, const FormulaPtr& b) { return a->key < b->key; });
  std::vector<FormulaPtr> kept;
  for (auto& p : flat) {
    if (p->key == zero->key) return zero;
    if (p->key == unit->key) continue;
    if (!kept.empty() && kept.back()->key == p->key) continue;
    kept.push_back(std::move(p));
  }
  if (is_and) {
    for (const auto& p : kept)
      if (p->kind == Formula::Kind::Atom) {
        const std::string neg = "n" + std::to_string(p->atom);
        for (const auto& q : kept)
          if (q->key == neg) return false_singleton();
      }
  }
  if (kept.empty()) return unit;
  if (kept.size() == 1) return kept.front();
  std::string key = is_and ? "(&" : "(|";
  for (const auto& p : kept) {
    key += p->key;
    key += ',';
  }
  key += ')';
  return make_node(kind, npos, std::move(kept), std::move(key));
}

}  // namespace

FormulaPtr make_and(std::vector<FormulaPtr> parts) {
  return make_bool(Formula::Kind::And, std::move(parts));
}

FormulaPtr make_or(std::vector<FormulaPtr> parts) {
  return make_bool(Formula::Kind::Or, std::move(parts));
}

FormulaPtr make_next(FormulaPtr f) {
  std::string key = "(X" + f->key + ")";
  return make_node(Formula::Kind::Next, npos, {std::move(f)}, std::move(key));
}

FormulaPtr make_until(FormulaPtr lhs, FormulaPtr rhs) {
  std::string key = "(U" + lhs->key + "," + rhs->key + ")";
  return make_node(Formula::Kind::Until, npos, {std::move(lhs), std::move(rhs)}, std::move(key));
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
  enum class Type { Ident, Not, And, Or, Next, Until, LParen, RParen, End };
  Type type = Type::End;
  std::string text;
  std::size_t pos = 0;
};

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    Token t;
    t.pos = i;
    if (c == '!') {
      t.type = Token::Type::Not;
      ++i;
    } else if (c == '&') {
      t.type = Token::Type::And;
      ++i;
    } else if (c == '|') {
      t.type = Token::Type::Or;
      ++i;
    } else if (c == '(') {
      t.type = Token::Type::LParen;
      ++i;
    } else if (c == ')') {
      t.type = Token::Type::RParen;
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      t.text = std::string(text.substr(i, j - i));
      if (t.text == "X")
        t.type = Token::Type::Next;
      else if (t.text == "U")
        t.type = Token::Type::Until;
      else
        t.type = Token::Type::Ident;
      i = j;
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", i);
    }
    out.push_back(std::move(t));
  }
  out.push_back(Token{Token::Type::End, "", text.size()});
  return out;
}

class FormulaParser {
 public:
  FormulaParser(std::vector<Token> tokens, const std::vector<std::string>& aps)
      : tokens_(std::move(tokens)), aps_(aps) {}

  FormulaPtr parse() {
    FormulaPtr f = parse_until();
    expect(Token::Type::End, "trailing input after formula");
    return f;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  Token take() { return tokens_[pos_++]; }

  void expect(Token::Type t, const std::string& msg) {
    if (peek().type != t) throw ParseError(msg, peek().pos);
  }

  std::size_t atom_index(const Token& t) {
    for (std::size_t i = 0; i < aps_.size(); ++i)
      if (aps_[i] == t.text) return i;
    throw ParseError("undeclared atom '" + t.text + "'", t.pos);
  }

  FormulaPtr parse_until() {
    FormulaPtr lhs = parse_or();
    if (peek().type == Token::Type::Until) {
      take();
      return make_until(std::move(lhs), parse_until());  // right-associative
    }
    return lhs;
  }

  FormulaPtr parse_or() {
    FormulaPtr f = parse_and();
    while (peek().type == Token::Type::Or) {
      take();
      f = make_or({std::move(f), parse_and()});
    }
    return f;
  }

  FormulaPtr parse_and() {
    FormulaPtr f = parse_unary();
    while (peek().type == Token::Type::And) {
      take();
      f = make_and({std::move(f), parse_unary()});
    }
    return f;
  }

  FormulaPtr parse_unary() {
    const Token& t = peek();
    switch (t.type) {
      case Token::Type::Not: {
        take();
        if (peek().type != Token::Type::Ident)
          throw ParseError("negation may only be applied to an atom", peek().pos);
        return make_not_atom(atom_index(take()));
      }
      case Token::Type::Next:
        take();
        return make_next(parse_unary());
      case Token::Type::Ident:
        return make_atom(atom_index(take()));
      case Token::Type::LParen: {
        take();
        FormulaPtr f = parse_until();
        expect(Token::Type::RParen, "expected ')'");
        take();
        return f;
      }
      default:
        throw ParseError("expected atom, '!', 'X' or '('", t.pos);
    }
  }

  std::vector<Token> tokens_;
  const std::vector<std::string>& aps_;
  std::size_t pos_ = 0;
};

}  // namespace

FormulaPtr parse_formula(std::string_view text, const std::vector<std::string>& declared_aps) {
  return FormulaParser(lex(text), declared_aps).parse();
}

std::string to_string(const FormulaPtr& f, const std::vector<std::string>& ap_names) {
  switch (f->kind) {
    case Formula::Kind::True:
      return "true";
    case Formula::Kind::False:
      return "false";
    case Formula::Kind::Atom:
      return ap_names[f->atom];
    case Formula::Kind::NotAtom:
      return "!" + ap_names[f->atom];
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::string sep = f->kind == Formula::Kind::And ? " & " : " | ";
      std::string out = "(";
      for (std::size_t i = 0; i < f->children.size(); ++i) {
        if (i > 0) out += sep;
        out += to_string(f->children[i], ap_names);
      }
      return out + ")";
    }
    case Formula::Kind::Next:
      return "X " + to_string(f->children[0], ap_names);
    case Formula::Kind::Until:
      return "(" + to_string(f->children[0], ap_names) + " U " +
             to_string(f->children[1], ap_names) + ")";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// DFA construction via syntactic derivatives
// ---------------------------------------------------------------------------

namespace {

FormulaPtr derivative(const FormulaPtr& f, Letter l,
                      std::map<std::pair<const Formula*, Letter>, FormulaPtr>& memo) {
  switch (f->kind) {
    case Formula::Kind::True:
      return true_singleton();
    case Formula::Kind::False:
      return false_singleton();
    case Formula::Kind::Atom:
      return ((l >> f->atom) & 1u) ? true_singleton() : false_singleton();
    case Formula::Kind::NotAtom:
      return ((l >> f->atom) & 1u) ? false_singleton() : true_singleton();
    default:
      break;
  }
  auto memo_key = std::make_pair(f.get(), l);
  if (auto it = memo.find(memo_key); it != memo.end()) return it->second;
  FormulaPtr result;
  switch (f->kind) {
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<FormulaPtr> parts;
      parts.reserve(f->children.size());
      for (const auto& c : f->children) parts.push_back(derivative(c, l, memo));
      result = f->kind == Formula::Kind::And ? make_and(std::move(parts))
                                             : make_or(std::move(parts));
      break;
    }
    case Formula::Kind::Next:
      result = f->children[0];
      break;
    case Formula::Kind::Until: {
      // lhs U rhs  ==  rhs | (lhs & X(lhs U rhs))
      FormulaPtr keep = make_and({derivative(f->children[0], l, memo), f});
      result = make_or({derivative(f->children[1], l, memo), std::move(keep)});
      break;
    }
    default:
      result = false_singleton();
  }
  memo.emplace(memo_key, result);
  return result;
}

}  // namespace

std::vector<bool> Dfa::can_reach_accepting() const {
  std::vector<bool> live(n_states, false);
  live[accepting] = true;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t q = 0; q < n_states; ++q) {
      if (live[q]) continue;
      for (std::size_t l = 0; l < n_letters(); ++l)
        if (live[next[q][l]]) {
          live[q] = true;
          changed = true;
          break;
        }
    }
  }
  return live;
}

Dfa to_dfa(const FormulaPtr& f, const std::vector<std::string>& ap_universe,
           std::size_t state_cap) {
  if (ap_universe.size() > kMaxAtomicPropositions)
    throw std::invalid_argument("too many atomic propositions for explicit letter tables");

  Dfa dfa;
  dfa.ap_names = ap_universe;
  const std::size_t n_letters = dfa.n_letters();

  std::unordered_map<std::string, std::size_t> id_of;
  std::vector<FormulaPtr> states;
  auto intern = [&](const FormulaPtr& g) {
    auto [it, inserted] = id_of.emplace(g->key, states.size());
    if (inserted) {
      states.push_back(g);
      if (states.size() > state_cap)
        throw std::runtime_error("DFA state cap of " + std::to_string(state_cap) + " exceeded");
    }
    return it->second;
  };

  std::map<std::pair<const Formula*, Letter>, FormulaPtr> memo;
  dfa.initial = intern(f);
  // Accepting residual, interned up front so the automaton always carries
  // exactly one accepting state even when it is unreachable.
  dfa.accepting = intern(true_singleton());
  // intern only ever appends, so exploring ids in order visits every state.
  for (std::size_t q = 0; q < states.size(); ++q) {
    FormulaPtr state = states[q];  // states may reallocate while interning targets
    dfa.next.emplace_back(n_letters);
    for (Letter l = 0; l < n_letters; ++l)
      dfa.next[q][l] = static_cast<std::uint32_t>(intern(derivative(state, l, memo)));
  }
  dfa.n_states = states.size();
  return dfa;
}

// ---------------------------------------------------------------------------
// Edge factoring
// ---------------------------------------------------------------------------

std::string Conjunction::to_string(const std::vector<std::string>& ap_names) const {
  std::string out;
  for (std::size_t i = 0; i < req.size(); ++i) {
    if (req[i] == kFree) continue;
    if (!out.empty()) out += " & ";
    if (req[i] == kFalse) out += "!";
    out += ap_names[i];
  }
  return out.empty() ? "true" : out;
}

namespace {

// Letters compatible with a partial assignment all map to the same successor?
bool uniform_target(const Dfa& dfa, std::size_t q, const Conjunction& partial,
                    std::size_t* target) {
  bool first = true;
  std::size_t t = 0;
  for (Letter l = 0; l < dfa.n_letters(); ++l) {
    if (!partial.satisfied_by(l)) continue;
    std::size_t s = dfa.step(q, l);
    if (first) {
      t = s;
      first = false;
    } else if (s != t) {
      return false;
    }
  }
  *target = t;
  return true;
}

void split_on_vars(const Dfa& dfa, std::size_t q, Conjunction& partial, std::size_t var,
                   std::vector<GuardedEdge>& out) {
  std::size_t target = 0;
  if (uniform_target(dfa, q, partial, &target)) {
    out.push_back({partial, target});
    return;
  }
  // uniform_target fails only while some AP is still free
  while (partial.req[var] != Conjunction::kFree) ++var;
  for (std::uint8_t v : {Conjunction::kFalse, Conjunction::kTrue}) {
    partial.req[var] = v;
    split_on_vars(dfa, q, partial, var + 1, out);
  }
  partial.req[var] = Conjunction::kFree;
}

}  // namespace

OutgoingTransitions factor_edges(const Dfa& dfa) {
  OutgoingTransitions out;
  out.at.resize(dfa.n_states);
  for (std::size_t q = 0; q < dfa.n_states; ++q) {
    Conjunction partial;
    partial.req.assign(dfa.ap_names.size(), Conjunction::kFree);
    split_on_vars(dfa, q, partial, 0, out.at[q]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Guard expressions and the DFA file format
// ---------------------------------------------------------------------------

namespace {

struct GuardExpr {
  enum class Kind { True, Atom, Not, And, Or };
  Kind kind = Kind::True;
  std::size_t atom = npos;
  std::vector<GuardExpr> children;

  bool eval(Letter l) const {
    switch (kind) {
      case Kind::True:
        return true;
      case Kind::Atom:
        return (l >> atom) & 1u;
      case Kind::Not:
        return !children[0].eval(l);
      case Kind::And:
        for (const auto& c : children)
          if (!c.eval(l)) return false;
        return true;
      case Kind::Or:
        for (const auto& c : children)
          if (c.eval(l)) return true;
        return false;
    }
    return false;
  }
};

class GuardParser {
 public:
  GuardParser(std::vector<Token> tokens, const std::vector<std::string>& aps)
      : tokens_(std::move(tokens)), aps_(aps) {}

  GuardExpr parse() {
    GuardExpr e = parse_or();
    if (tokens_[pos_].type != Token::Type::End)
      throw ParseError("trailing input after guard", tokens_[pos_].pos);
    return e;
  }

 private:
  GuardExpr parse_or() {
    GuardExpr e = parse_and();
    while (tokens_[pos_].type == Token::Type::Or) {
      ++pos_;
      GuardExpr o;
      o.kind = GuardExpr::Kind::Or;
      o.children = {std::move(e), parse_and()};
      e = std::move(o);
    }
    return e;
  }

  GuardExpr parse_and() {
    GuardExpr e = parse_unary();
    while (tokens_[pos_].type == Token::Type::And) {
      ++pos_;
      GuardExpr a;
      a.kind = GuardExpr::Kind::And;
      a.children = {std::move(e), parse_unary()};
      e = std::move(a);
    }
    return e;
  }

  GuardExpr parse_unary() {
    const Token& t = tokens_[pos_];
    if (t.type == Token::Type::Not) {
      ++pos_;
      GuardExpr n;
      n.kind = GuardExpr::Kind::Not;
      n.children = {parse_unary()};
      return n;
    }
    if (t.type == Token::Type::LParen) {
      ++pos_;
      GuardExpr e = parse_or();
      if (tokens_[pos_].type != Token::Type::RParen)
        throw ParseError("expected ')' in guard", tokens_[pos_].pos);
      ++pos_;
      return e;
    }
    if (t.type == Token::Type::Ident) {
      ++pos_;
      if (t.text == "true") return GuardExpr{};
      GuardExpr a;
      a.kind = GuardExpr::Kind::Atom;
      for (std::size_t i = 0; i < aps_.size(); ++i)
        if (aps_[i] == t.text) {
          a.atom = i;
          return a;
        }
      throw ParseError("undeclared atom '" + t.text + "' in guard", t.pos);
    }
    throw ParseError("expected atom, '!', 'true' or '(' in guard", t.pos);
  }

  std::vector<Token> tokens_;
  const std::vector<std::string>& aps_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<bool> guard_letters(std::string_view guard,
                                const std::vector<std::string>& ap_universe) {
  GuardExpr e = GuardParser(lex(guard), ap_universe).parse();
  std::vector<bool> out(std::size_t{1} << ap_universe.size(), false);
  for (Letter l = 0; l < out.size(); ++l) out[l] = e.eval(l);
  return out;
}

Dfa load_dfa_file(const std::string& path, const std::vector<std::string>& ap_universe) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open DFA file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("DFA file '" + path + "': " + e.what());
  }

  for (const auto& key : {"states", "initial", "accepting", "transitions"})
    if (!j.contains(key))
      throw std::runtime_error("DFA file missing required field '" + std::string(key) + "'");

  Dfa dfa;
  dfa.ap_names = ap_universe;
  std::map<std::string, std::size_t> id_of;
  for (const auto& s : j.at("states")) {
    std::string name = s.is_string() ? s.get<std::string>() : s.dump();
    if (!id_of.emplace(name, id_of.size()).second)
      throw std::runtime_error("duplicate DFA state '" + name + "'");
  }
  dfa.n_states = id_of.size();
  auto state_id = [&](const nlohmann::json& s) {
    std::string name = s.is_string() ? s.get<std::string>() : s.dump();
    auto it = id_of.find(name);
    if (it == id_of.end()) throw std::runtime_error("unknown DFA state '" + name + "'");
    return it->second;
  };
  dfa.initial = state_id(j.at("initial"));
  if (j.at("accepting").is_array()) {
    if (j.at("accepting").size() != 1)
      throw std::runtime_error("DFA must have exactly one accepting state");
    dfa.accepting = state_id(j.at("accepting").at(0));
  } else {
    dfa.accepting = state_id(j.at("accepting"));
  }

  const std::size_t n_letters = dfa.n_letters();
  std::vector<std::vector<bool>> assigned(dfa.n_states, std::vector<bool>(n_letters, false));
  dfa.next.assign(dfa.n_states, std::vector<std::uint32_t>(n_letters, 0));
  for (const auto& t : j.at("transitions")) {
    std::size_t from = state_id(t.at("from"));
    std::size_t to = state_id(t.at("to"));
    std::vector<bool> letters = guard_letters(t.at("guard").get<std::string>(), ap_universe);
    for (Letter l = 0; l < n_letters; ++l) {
      if (!letters[l]) continue;
      if (assigned[from][l])
        throw std::runtime_error("nondeterministic DFA: state '" + t.at("from").dump() +
                                 "' has overlapping guards");
      assigned[from][l] = true;
      dfa.next[from][l] = static_cast<std::uint32_t>(to);
    }
  }
  for (std::size_t q = 0; q < dfa.n_states; ++q)
    for (Letter l = 0; l < n_letters; ++l)
      if (!assigned[q][l])
        throw std::runtime_error("incomplete DFA: state " + std::to_string(q) +
                                 " has no transition for some letter");
  for (Letter l = 0; l < n_letters; ++l)
    if (dfa.next[dfa.accepting][l] != dfa.accepting)
      throw std::runtime_error("accepting state must be absorbing");
  return dfa;
}

void save_dfa_file(const Dfa& dfa, const OutgoingTransitions& outgoing, const std::string& path) {
  nlohmann::ordered_json j;
  std::vector<std::string> names;
  for (std::size_t q = 0; q < dfa.n_states; ++q) names.push_back("q" + std::to_string(q));
  j["states"] = names;
  j["initial"] = names[dfa.initial];
  j["accepting"] = names[dfa.accepting];
  auto transitions = nlohmann::ordered_json::array();
  for (std::size_t q = 0; q < dfa.n_states; ++q)
    for (const auto& e : outgoing.at[q]) {
      nlohmann::ordered_json t;
      t["from"] = names[q];
      t["to"] = names[e.target];
      t["guard"] = e.guard.to_string(dfa.ap_names);
      transitions.push_back(std::move(t));
    }
  j["transitions"] = std::move(transitions);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write DFA file '" + path + "'");
  out << j.dump(2) << "\n";
}

}  // namespace ttvi
