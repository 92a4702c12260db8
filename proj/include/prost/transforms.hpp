#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "prost/ptrs.hpp"

namespace prost {

inline Ptrs union_ptrs(const Ptrs& a, const Ptrs& b) {
  std::vector<ProbRule> rules = a.rules();
  for (const ProbRule& r : b.rules()) rules.push_back(r);
  std::vector<std::string> vars = a.declared_vars();
  for (const std::string& v : b.declared_vars())
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
  std::vector<Symbol> extra = a.extra_symbols();
  for (const Symbol& s : b.extra_symbols()) extra.push_back(s);
  return Ptrs(std::move(rules), std::move(vars), std::move(extra));
}

// Sub-system made of the listed rules, in their original order.
inline Ptrs restrict_rules(const Ptrs& p, const std::vector<std::size_t>& indices) {
  std::vector<ProbRule> rules;
  for (std::size_t i : indices) rules.push_back(p.rule(i));
  return Ptrs(std::move(rules), p.declared_vars());
}

// ---------------------------------------------------------------------------
// Generator rules and the encode/decode variants

struct GeneratorExtension {
  Ptrs rules;
  std::string argenc = "argenc";
  std::map<std::string, std::string> enc;   // f -> enc_f
  std::map<std::string, std::string> cons;  // defined f -> cons_f
  std::map<std::string, std::string> back;  // enc_f / cons_f -> f
};

inline GeneratorExtension generator_rules(const Ptrs& p) {
  GeneratorExtension g;
  auto reserve = [&](const std::string& name) {
    if (p.has_symbol(name)) throw Error("name-clash", "'" + name + "' already occurs in the system");
  };
  reserve(g.argenc);
  for (const Symbol& f : p.signature()) {
    g.enc[f.name] = "enc_" + f.name;
    g.back["enc_" + f.name] = f.name;
    reserve("enc_" + f.name);
  }
  for (const Symbol& f : p.defined()) {
    g.cons[f.name] = "cons_" + f.name;
    g.back["cons_" + f.name] = f.name;
    reserve("cons_" + f.name);
  }

  auto xs = [](std::size_t k) {
    std::vector<Term> v;
    for (std::size_t i = 1; i <= k; ++i) v.push_back(Term::var("x" + std::to_string(i)));
    return v;
  };
  auto rebuilt = [&](const Symbol& f) {
    std::vector<Term> args;
    for (const Term& x : xs(f.arity)) args.push_back(Term::app(g.argenc, {x}));
    return Term::app(f.name, std::move(args));
  };

  std::vector<ProbRule> rules;
  auto add = [&](Term lhs, Term rhs) { rules.push_back({std::move(lhs), {{Rational(1), std::move(rhs)}}, 0}); };
  for (const Symbol& f : p.defined()) add(Term::app(g.enc[f.name], xs(f.arity)), rebuilt(f));
  for (const Symbol& f : p.constructors()) add(Term::app(g.enc[f.name], xs(f.arity)), rebuilt(f));
  for (const Symbol& f : p.defined())
    add(Term::app(g.argenc, {Term::app(g.cons[f.name], xs(f.arity))}), rebuilt(f));
  for (const Symbol& f : p.constructors()) add(Term::app(g.argenc, {Term::app(f.name, xs(f.arity))}), rebuilt(f));

  std::size_t widest = 0;
  for (const Symbol& f : p.signature()) widest = std::max(widest, f.arity);
  std::vector<std::string> vars;
  for (std::size_t i = 1; i <= widest; ++i) vars.push_back("x" + std::to_string(i));
  g.rules = Ptrs(std::move(rules), std::move(vars));
  return g;
}

class Variants {
 public:
  explicit Variants(const Ptrs& p) : g_(generator_rules(p)) {}

  const GeneratorExtension& generators() const { return g_; }

  Term cv(const Term& t) const {
    if (t.is_var()) return t;
    std::vector<Term> args;
    for (const Term& a : t.args()) args.push_back(cv(a));
    auto it = g_.cons.find(t.name());
    return Term::app(it == g_.cons.end() ? t.name() : it->second, std::move(args));
  }

  Term bv(const Term& t) const {
    if (t.is_var()) throw Error("bv-of-variable", "basic variant of variable " + t.str());
    auto it = g_.enc.find(t.name());
    if (it == g_.enc.end()) throw Error("unknown-symbol", "'" + t.name() + "' is not in the signature");
    std::vector<Term> args;
    for (const Term& a : t.args()) args.push_back(cv(a));
    return Term::app(it->second, std::move(args));
  }

  Term dv(const Term& t) const {
    if (t.is_var()) return t;
    if (t.name() == g_.argenc && t.arity() == 1) return dv(t.arg(0));
    std::vector<Term> args;
    for (const Term& a : t.args()) args.push_back(dv(a));
    auto it = g_.back.find(t.name());
    return Term::app(it == g_.back.end() ? t.name() : it->second, std::move(args));
  }

 private:
  GeneratorExtension g_;
};

// ---------------------------------------------------------------------------
// Disjoint-union abstraction

struct Abstraction {
  std::vector<Term> a1, a2;      // before variable identification
  std::vector<Term> abs1, abs2;  // closed under all maps V(q) -> V(q)
};

namespace detail {

inline std::set<std::string> symbol_names(const Ptrs& p) {
  std::set<std::string> s;
  for (const Symbol& f : p.signature()) s.insert(f.name);
  return s;
}

inline std::vector<Term> abstract(const Term& t, const std::set<std::string>& own, FreshVars& fresh) {
  if (t.is_var()) return {fresh.next()};
  if (own.count(t.name())) {
    std::vector<std::vector<Term>> parts;
    for (const Term& a : t.args()) parts.push_back(abstract(a, own, fresh));
    std::vector<std::vector<Term>> combos{{}};
    for (const auto& part : parts) {
      std::vector<std::vector<Term>> grown;
      for (const auto& prefix : combos)
        for (const Term& q : part) {
          auto c = prefix;
          c.push_back(q);
          grown.push_back(std::move(c));
        }
      combos = std::move(grown);
    }
    std::vector<Term> out;
    for (auto& c : combos) out.push_back(Term::app(t.name(), std::move(c)));
    return out;
  }
  std::vector<Term> out{fresh.next()};
  for (const Term& a : t.args())
    for (Term& q : abstract(a, own, fresh)) out.push_back(std::move(q));
  return out;
}

inline std::vector<Term> identify_vars(const std::vector<Term>& qs, std::size_t max_vars) {
  std::vector<Term> out;
  std::set<Term, TermLess> seen;
  for (const Term& q : qs) {
    std::vector<std::string> vs = variables(q);
    if (vs.size() > max_vars)
      throw Error("abstraction-limit", std::to_string(vs.size()) + " variables in " + q.str() + " (limit " +
                                           std::to_string(max_vars) + ")");
    std::size_t k = vs.size();
    std::vector<std::size_t> phi(k, 0);
    while (true) {
      Substitution s;
      for (std::size_t i = 0; i < k; ++i) s.emplace(vs[i], Term::var(vs[phi[i]]));
      Term img = substitute(s, q);
      if (seen.insert(img).second) out.push_back(img);
      std::size_t i = 0;
      while (i < k && ++phi[i] == k) phi[i++] = 0;
      if (i == k) break;
    }
  }
  return out;
}

}  // namespace detail

inline Abstraction disjoint_abstraction(const Term& t, const Ptrs& p1, const Ptrs& p2, std::size_t max_vars = 8) {
  auto s1 = detail::symbol_names(p1);
  auto s2 = detail::symbol_names(p2);
  for (const std::string& f : s1)
    if (s2.count(f)) throw Error("shared-symbol", "'" + f + "' occurs in both systems");
  Abstraction a;
  FreshVars fresh1, fresh2;
  a.a1 = detail::abstract(t, s1, fresh1);
  a.a2 = detail::abstract(t, s2, fresh2);
  a.abs1 = detail::identify_vars(a.a1, max_vars);
  a.abs2 = detail::identify_vars(a.a2, max_vars);
  return a;
}

// Renames variables to _1, _2, ... in order of first occurrence.
inline Term canonical_renaming(const Term& t) {
  Substitution s;
  std::size_t n = 0;
  for (const std::string& x : variables(t)) s.emplace(x, Term::var("_" + std::to_string(++n)));
  return substitute(s, t);
}

// ---------------------------------------------------------------------------
// Infinite-split detection

struct SplitWitness {
  enum Kind { Arity2Finite, NonErasingLoop } kind = Arity2Finite;
  Symbol symbol;                // Arity2Finite
  std::size_t rule = 0;         // NonErasingLoop
  std::size_t branch = 0;       // branch containing the lhs instance
  Position position;            // of the instance inside that branch
  Substitution sigma;
  std::string var;
  std::size_t other_branch = 0;  // the branch s keeping the variable
};

inline std::string describe(const SplitWitness& w, const Ptrs& p) {
  if (w.kind == SplitWitness::Arity2Finite)
    return "arity2-finite: symbol " + to_string(w.symbol) + " has arity at least 2";
  const ProbRule& r = p.rule(w.rule);
  return "non-erasing-loop: rule " + std::to_string(w.rule + 1) + " (" + render_rule(r) + "), branch " +
         std::to_string(w.branch + 1) + " contains " + r.lhs.str() + to_string(w.sigma) + " at position " +
         to_string(w.position) + ", variable " + w.var + " survives in branch " + std::to_string(w.other_branch + 1) +
         " (" + r.rhs[w.other_branch].term.str() + ")";
}

inline std::optional<SplitWitness> detect_infinite_splits(const Ptrs& p) {
  for (const Symbol& f : p.signature())
    if (f.arity >= 2) {
      SplitWitness w;
      w.kind = SplitWitness::Arity2Finite;
      w.symbol = f;
      return w;
    }
  for (const ProbRule& rule : p.rules()) {
    std::vector<std::string> lvars = variables(rule.lhs);
    for (std::size_t a = 0; a < rule.rhs.size(); ++a) {
      const Term& r = rule.rhs[a].term;
      for (const Position& pos : positions(r)) {
        auto sigma = match_term(rule.lhs, subterm_at(r, pos));
        if (!sigma) continue;
        for (std::size_t b = 0; b < rule.rhs.size(); ++b) {
          if (b == a) continue;
          const Term& s = rule.rhs[b].term;
          for (const std::string& x : lvars) {
            Term img = substitute(*sigma, Term::var(x));
            if (occurs(x, img) && occurs(x, s)) {
              SplitWitness w;
              w.kind = SplitWitness::NonErasingLoop;
              w.rule = rule.index;
              w.branch = a;
              w.position = pos;
              w.sigma = *sigma;
              w.var = x;
              w.other_branch = b;
              return w;
            }
          }
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace prost
