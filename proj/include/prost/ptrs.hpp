#pragma once

#include <atomic>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "prost/rational.hpp"
#include "prost/term.hpp"

namespace prost {

struct Branch {
  Rational p;
  Term term;
};

// Multiset semantics: duplicate (p, t) pairs are kept.
using MultiDistribution = std::vector<Branch>;

struct ProbRule {
  Term lhs;
  MultiDistribution rhs;
  std::size_t index = 0;
};

struct Symbol {
  std::string name;
  std::size_t arity = 0;
  auto operator<=>(const Symbol&) const = default;
};

inline std::string to_string(const Symbol& s) { return s.name + "/" + std::to_string(s.arity); }

inline Rational total_mass(const MultiDistribution& mu) {
  Rational s = 0;
  for (const Branch& b : mu) s += b.p;
  return s;
}

class Ptrs {
 public:
  Ptrs() : Ptrs(std::vector<ProbRule>{}) {}

  explicit Ptrs(std::vector<ProbRule> rules, std::vector<std::string> declared_vars = {},
                std::vector<Symbol> extra_symbols = {})
      : rules_(std::move(rules)), declared_vars_(std::move(declared_vars)), extra_(std::move(extra_symbols)) {
    static std::atomic<std::uint64_t> next_id{1};
    id_ = next_id.fetch_add(1);
    for (std::size_t i = 0; i < rules_.size(); ++i) rules_[i].index = i;
    validate();
    derive();
  }

  const std::vector<ProbRule>& rules() const noexcept { return rules_; }
  const ProbRule& rule(std::size_t i) const { return rules_.at(i); }
  std::size_t size() const noexcept { return rules_.size(); }
  bool empty() const noexcept { return rules_.empty(); }
  const std::vector<std::string>& declared_vars() const noexcept { return declared_vars_; }
  const std::vector<Symbol>& extra_symbols() const noexcept { return extra_; }
  std::uint64_t id() const noexcept { return id_; }

  // Whole signature in first-occurrence order (rules first, then extras).
  const std::vector<Symbol>& signature() const noexcept { return signature_; }
  const std::vector<Symbol>& defined() const noexcept { return defined_; }
  const std::vector<Symbol>& constructors() const noexcept { return constructors_; }

  bool is_defined(const std::string& f) const { return defined_names_.count(f) > 0; }
  bool has_symbol(const std::string& f) const { return arity_.count(f) > 0; }
  std::optional<std::size_t> arity_of(const std::string& f) const {
    auto it = arity_.find(f);
    if (it == arity_.end()) return std::nullopt;
    return it->second;
  }

  const std::vector<std::size_t>& rules_with_root(const std::string& f) const {
    static const std::vector<std::size_t> none;
    auto it = by_root_.find(f);
    return it == by_root_.end() ? none : it->second;
  }

  bool trivial_probabilities() const {
    for (const ProbRule& r : rules_)
      if (r.rhs.size() != 1) return false;
    return true;
  }

  // True iff some rule's lhs matches t at the root.
  bool root_redex(const Term& t) const {
    if (t.is_var()) return false;
    for (std::size_t i : rules_with_root(t.name()))
      if (match_term(rules_[i].lhs, t)) return true;
    return false;
  }

  bool is_normal_form(const Term& t) const {
    if (t.is_var()) return true;
    const auto* n = t.id();
    std::uint64_t tag = n->nf_tag.load(std::memory_order_relaxed);
    if ((tag >> 1) == id_) return tag & 1;
    bool nf = true;
    for (const Term& a : t.args())
      if (!is_normal_form(a)) {
        nf = false;
        break;
      }
    if (nf) nf = !root_redex(t);
    n->nf_tag.store((id_ << 1) | (nf ? 1 : 0), std::memory_order_relaxed);
    return nf;
  }

  bool is_constructor_term(const Term& t) const {
    if (t.is_var()) return true;
    if (is_defined(t.name())) return false;
    for (const Term& a : t.args())
      if (!is_constructor_term(a)) return false;
    return true;
  }

  bool is_basic(const Term& t) const {
    if (t.is_var() || !is_defined(t.name())) return false;
    for (const Term& a : t.args())
      if (!is_constructor_term(a)) return false;
    return true;
  }

 private:
  void note_symbols(const Term& t, std::vector<Symbol>& order) {
    if (t.is_var()) return;
    auto [it, fresh] = arity_.emplace(t.name(), t.arity());
    if (!fresh && it->second != t.arity())
      throw Error("arity-mismatch", "symbol '" + t.name() + "' used with arities " + std::to_string(it->second) +
                                        " and " + std::to_string(t.arity()));
    if (fresh) order.push_back({t.name(), t.arity()});
    for (const Term& a : t.args()) note_symbols(a, order);
  }

  void validate() const {
    for (const ProbRule& r : rules_) {
      std::string where = "rule " + std::to_string(r.index + 1);
      if (r.lhs.is_var()) throw Error("variable-lhs-error", where + ": left-hand side is the variable " + r.lhs.str());
      if (r.rhs.empty()) throw Error("probability-sum-error", where + ": empty distribution");
      std::set<std::string> lv;
      for (const std::string& x : variables(r.lhs)) lv.insert(x);
      for (const Branch& b : r.rhs) {
        if (b.p <= 0 || b.p > 1)
          throw Error("probability-sum-error", where + ": probability " + to_string(b.p) + " outside (0,1]");
        for (const std::string& x : variables(b.term))
          if (!lv.count(x)) throw Error("extra-variable-error", where + ": variable " + x + " not in lhs");
      }
      Rational s = total_mass(r.rhs);
      if (s != 1) throw Error("probability-sum-error", where + ": probabilities sum to " + to_string(s));
    }
  }

  void derive() {
    std::vector<Symbol> order;
    for (const ProbRule& r : rules_) {
      note_symbols(r.lhs, order);
      for (const Branch& b : r.rhs) note_symbols(b.term, order);
      by_root_[r.lhs.name()].push_back(r.index);
      defined_names_.insert(r.lhs.name());
    }
    for (const Symbol& s : extra_) {
      auto [it, fresh] = arity_.emplace(s.name, s.arity);
      if (!fresh && it->second != s.arity) throw Error("arity-mismatch", "extra symbol '" + s.name + "'");
      if (fresh) order.push_back(s);
    }
    signature_ = order;
    for (const Symbol& s : order) (defined_names_.count(s.name) ? defined_ : constructors_).push_back(s);
  }

  std::vector<ProbRule> rules_;
  std::vector<std::string> declared_vars_;
  std::vector<Symbol> extra_;
  std::uint64_t id_ = 0;
  std::map<std::string, std::size_t> arity_;
  std::set<std::string> defined_names_;
  std::vector<Symbol> signature_, defined_, constructors_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_root_;
};

inline std::pair<std::vector<Symbol>, std::vector<Symbol>> classify_symbols(const Ptrs& p) {
  return {p.defined(), p.constructors()};
}

inline bool is_normal_form(const Term& t, const Ptrs& p) { return p.is_normal_form(t); }
inline bool is_basic(const Term& t, const Ptrs& p) { return p.is_basic(t); }

inline Ptrs embed_trs(const std::vector<std::pair<Term, Term>>& rules, std::vector<std::string> vars = {}) {
  std::vector<ProbRule> out;
  for (const auto& [l, r] : rules) out.push_back({l, {{Rational(1), r}}, 0});
  return Ptrs(std::move(out), std::move(vars));
}

namespace detail {

// Every f(t1..tk) with f of arity k >= 1 and sum of |ti| == left, ti drawn from pool[|ti|].
inline void spread_args(const Symbol& f, const std::vector<std::vector<Term>>& pool, std::size_t left,
                        std::vector<Term>& acc, std::vector<Term>& out) {
  std::size_t a = acc.size();
  if (a == f.arity) {
    if (left == 0) out.push_back(Term::app(f.name, acc));
    return;
  }
  for (std::size_t k = 1; k + (f.arity - a - 1) <= left && k < pool.size(); ++k)
    for (const Term& t : pool[k]) {
      acc.push_back(t);
      spread_args(f, pool, left - k, acc, out);
      acc.pop_back();
    }
}

inline std::vector<std::vector<Term>> constructor_terms_upto(const Ptrs& p, std::size_t size,
                                                           const std::string& leaf_var) {
  std::vector<std::vector<Term>> by_size(size + 1);
  bool constants = false;
  for (const Symbol& c : p.constructors()) constants = constants || c.arity == 0;
  for (std::size_t n = 1; n <= size; ++n) {
    if (n == 1 && !constants) by_size[1].push_back(Term::var(leaf_var));
    for (const Symbol& c : p.constructors()) {
      if (c.arity == 0) {
        if (n == 1) by_size[1].push_back(Term::app(c.name));
        continue;
      }
      std::vector<Term> acc;
      spread_args(c, by_size, n - 1, acc, by_size[n]);
    }
  }
  return by_size;
}

}  // namespace detail

// Constructor terms of exactly `size` symbols. Leaves are the constructor
// constants, or the variable `leaf_var` when there are none.
inline std::vector<Term> constructor_terms(const Ptrs& p, std::size_t size, const std::string& leaf_var = "x") {
  return detail::constructor_terms_upto(p, size, leaf_var)[size];
}

// Basic terms with at most `max_size` symbols, smallest first.
inline std::vector<Term> basic_terms(const Ptrs& p, std::size_t max_size, const std::string& leaf_var = "x") {
  auto cons = detail::constructor_terms_upto(p, max_size > 0 ? max_size - 1 : 0, leaf_var);
  std::vector<Term> out;
  for (std::size_t n = 1; n <= max_size; ++n)
    for (const Symbol& f : p.defined()) {
      if (f.arity == 0) {
        if (n == 1) out.push_back(Term::app(f.name));
        continue;
      }
      std::vector<Term> acc;
      detail::spread_args(f, cons, n - 1, acc, out);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Text format

namespace detail {

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  struct Token {
    enum Kind { Ident, Punct, End } kind;
    std::string text;
    int line, col;
  };

  Token peek() {
    if (!have_) {
      cur_ = scan();
      have_ = true;
    }
    return cur_;
  }

  Token next() {
    Token t = peek();
    have_ = false;
    return t;
  }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw Error("syntax-error", "line " + std::to_string(t.line) + ", column " + std::to_string(t.col) + ": " + msg);
  }

  Token expect(const std::string& punct) {
    Token t = next();
    if (t.kind != Token::Punct || t.text != punct)
      fail(t, "expected '" + punct + "' but found " + describe(t));
    return t;
  }

  Token expect_ident() {
    Token t = next();
    if (t.kind != Token::Ident) fail(t, "expected identifier but found " + describe(t));
    return t;
  }

  bool at(const std::string& punct) {
    Token t = peek();
    return t.kind == Token::Punct && t.text == punct;
  }

  static std::string describe(const Token& t) {
    if (t.kind == Token::End) return "end of input";
    return "'" + t.text + "'";
  }

 private:
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

  void skip() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  Token scan() {
    skip();
    Token t{Token::End, "", line_, col_};
    if (pos_ >= src_.size()) return t;
    char c = src_[pos_];
    if (ident_char(c)) {
      t.kind = Token::Ident;
      while (pos_ < src_.size() && ident_char(src_[pos_])) {
        t.text += src_[pos_];
        advance();
      }
      return t;
    }
    t.kind = Token::Punct;
    if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
      t.text = "->";
      advance();
      advance();
      return t;
    }
    static const std::string singles = "{}|:;(),/";
    if (singles.find(c) == std::string::npos) fail(t, std::string("unexpected character '") + c + "'");
    t.text = std::string(1, c);
    advance();
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token cur_{Token::End, "", 1, 1};
  bool have_ = false;
};

inline Term parse_term_tokens(Lexer& lx, const std::set<std::string>& vars) {
  auto id = lx.expect_ident();
  if (lx.at("(")) {
    lx.next();
    if (vars.count(id.text))
      throw Error("arity-mismatch", "line " + std::to_string(id.line) + ", column " + std::to_string(id.col) +
                                        ": variable '" + id.text + "' applied to arguments");
    std::vector<Term> args;
    args.push_back(parse_term_tokens(lx, vars));
    while (lx.at(",")) {
      lx.next();
      args.push_back(parse_term_tokens(lx, vars));
    }
    lx.expect(")");
    return Term::app(id.text, std::move(args));
  }
  if (vars.count(id.text)) return Term::var(id.text);
  return Term::app(id.text);
}

}  // namespace detail

// Identifiers listed in `vars` are variables; everything else is a symbol.
inline Term parse_term(std::string_view text, const std::set<std::string>& vars = {}) {
  detail::Lexer lx(text);
  Term t = detail::parse_term_tokens(lx, vars);
  auto end = lx.peek();
  if (end.kind != detail::Lexer::Token::End) lx.fail(end, "trailing input " + detail::Lexer::describe(end));
  return t;
}

inline Term parse_term(std::string_view text, const Ptrs& p) {
  std::set<std::string> vars(p.declared_vars().begin(), p.declared_vars().end());
  return parse_term(text, vars);
}

inline Ptrs parse_ptrs(std::string_view text) {
  using Tok = detail::Lexer::Token;
  detail::Lexer lx(text);
  std::vector<std::string> vars;
  std::set<std::string> varset;
  Tok head = lx.next();
  if (head.kind == Tok::Ident && head.text == "vars") {
    while (lx.peek().kind == Tok::Ident) {
      auto v = lx.next();
      if (varset.insert(v.text).second) vars.push_back(v.text);
    }
    if (vars.empty()) lx.fail(lx.peek(), "empty variable declaration");
    lx.expect(";");
    head = lx.next();
  }
  if (head.kind != Tok::Ident || head.text != "rules") lx.fail(head, "expected 'rules:' but found " + lx.describe(head));
  lx.expect(":");

  std::vector<ProbRule> rules;
  do {
    Term lhs = detail::parse_term_tokens(lx, varset);
    lx.expect("->");
    MultiDistribution mu;
    if (lx.at("{")) {
      lx.next();
      do {
        if (!mu.empty()) lx.next();
        auto num = lx.expect_ident();
        std::string q = num.text;
        if (lx.at("/")) {
          lx.next();
          q += "/" + lx.expect_ident().text;
        }
        Rational p;
        try {
          p = parse_rational(q);
        } catch (const Error&) {
          lx.fail(num, "bad probability '" + q + "'");
        }
        lx.expect(":");
        mu.push_back({p, detail::parse_term_tokens(lx, varset)});
      } while (lx.at("|"));
      lx.expect("}");
    } else {
      mu.push_back({Rational(1), detail::parse_term_tokens(lx, varset)});
    }
    lx.expect(";");
    rules.push_back({lhs, std::move(mu), rules.size()});
  } while (lx.peek().kind != Tok::End);

  return Ptrs(std::move(rules), std::move(vars));
}

inline std::string render_distribution(const MultiDistribution& mu) {
  std::string s = "{";
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (i) s += " | ";
    s += to_string(mu[i].p) + ": " + mu[i].term.str();
  }
  return s + "}";
}

inline std::string render_rule(const ProbRule& r) { return r.lhs.str() + " -> " + render_distribution(r.rhs); }

inline std::string render(const Ptrs& p) {
  std::string s;
  std::vector<std::string> vars = p.declared_vars();
  std::set<std::string> known(vars.begin(), vars.end());
  for (const ProbRule& r : p.rules())
    for (const std::string& x : variables(r.lhs))
      if (known.insert(x).second) vars.push_back(x);
  if (!vars.empty()) {
    s += "vars";
    for (const std::string& v : vars) s += " " + v;
    s += ";\n";
  }
  s += "rules:\n";
  for (const ProbRule& r : p.rules()) s += "  " + render_rule(r) + ";\n";
  return s;
}

}  // namespace prost
