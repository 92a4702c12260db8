#pragma once

#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "prost/ptrs.hpp"

namespace prost::testing {

inline std::string corpus_path(const std::string& name) { return std::string(PROST_CORPUS) + "/" + name + ".ptrs"; }

inline Ptrs load(const std::string& name) {
  std::ifstream in(corpus_path(name));
  if (!in) throw Error("io-error", "missing corpus file " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ptrs(ss.str());
}

inline const std::vector<std::string>& corpus_names() {
  static const std::vector<std::string> names{
      "p_rw", "p_unary", "p_unary_prime", "p1",   "p2",   "p3",   "p4",   "p5",   "p6",   "p7",
      "p8",   "p9",      "p10",           "p10_1", "p10_2", "p11", "p12",  "p12_1", "p12_2", "p13",
      "p13_1", "p13_2",  "p14",           "p14_1", "p14_2", "r1",  "r2",   "r3",   "r4",   "r_d"};
  return names;
}

// Random term over the given symbols; leaves come from arity-0 symbols and vars.
inline Term random_term(std::mt19937_64& rng, const std::vector<Symbol>& sig, const std::vector<std::string>& vars,
                        std::size_t depth) {
  std::vector<Symbol> leaves, inner;
  for (const Symbol& f : sig) (f.arity == 0 ? leaves : inner).push_back(f);
  std::size_t nleaf = leaves.size() + vars.size();
  auto leaf = [&]() {
    std::size_t k = std::uniform_int_distribution<std::size_t>(0, nleaf - 1)(rng);
    return k < leaves.size() ? Term::app(leaves[k].name) : Term::var(vars[k - leaves.size()]);
  };
  if (depth == 0 || inner.empty() || std::uniform_int_distribution<int>(0, 2)(rng) == 0) return leaf();
  const Symbol& f = inner[std::uniform_int_distribution<std::size_t>(0, inner.size() - 1)(rng)];
  std::vector<Term> args;
  for (std::size_t i = 0; i < f.arity; ++i) args.push_back(random_term(rng, sig, vars, depth - 1));
  return Term::app(f.name, std::move(args));
}

// Ground terms over a, b, s/1 and f/2 of size at most 4.
inline std::vector<Term> small_ground_terms() {
  std::vector<std::vector<Term>> by(5);
  by[1] = {Term::app("a"), Term::app("b")};
  for (std::size_t n = 2; n <= 4; ++n) {
    for (const Term& t : by[n - 1]) by[n].push_back(Term::app("s", {t}));
    for (std::size_t l = 1; l + 1 < n; ++l)
      for (const Term& u : by[l])
        for (const Term& v : by[n - 1 - l]) by[n].push_back(Term::app("f", {u, v}));
  }
  std::vector<Term> out;
  for (auto& v : by) out.insert(out.end(), v.begin(), v.end());
  return out;
}

// Two terms over the variables x and x_r overlap iff some ground instance agrees.
inline bool overlap_by_search(const Term& s, const Term& t) {
  static const std::vector<Term> pool = small_ground_terms();
  for (const Term& g1 : pool)
    for (const Term& g2 : pool) {
      Substitution g{{"x", g1}, {"x_r", g2}};
      if (substitute(g, s) == substitute(g, t)) return true;
    }
  return false;
}

using Triple = std::tuple<std::size_t, std::size_t, Position>;

inline std::set<Triple> oracle_overlaps(const Ptrs& p) {
  std::set<Triple> out;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (const Position& pi : positions(p.rule(i).lhs)) {
      const Term& sub = subterm_at(p.rule(i).lhs, pi);
      if (sub.is_var()) continue;
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (i == j && pi.empty()) continue;
        Term other = substitute({{"x", Term::var("x_r")}}, p.rule(j).lhs);
        if (overlap_by_search(sub, other)) out.insert({i, j, pi});
      }
    }
  return out;
}

// Classical systems over a, b, s, f with the single variable x.
inline Ptrs random_system(std::mt19937_64& rng) {
  std::vector<Symbol> sig{{"a", 0}, {"b", 0}, {"s", 1}, {"f", 2}};
  std::size_t n = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  std::vector<ProbRule> rules;
  while (rules.size() < n) {
    Term l = random_term(rng, sig, {"x"}, 2);
    if (l.is_var()) continue;
    Term r = l.is_ground() ? Term::app("a") : Term::var("x");
    rules.push_back({l, {{Rational(1), r}}, 0});
  }
  return Ptrs(std::move(rules), {"x"});
}

// A ground start term for every corpus system: each lhs with variables
// replaced by the first constant of the signature.
inline std::vector<Term> lhs_starts(const Ptrs& p) {
  std::optional<std::string> constant;
  for (const Symbol& f : p.constructors())
    if (f.arity == 0 && !constant) constant = f.name;
  for (const Symbol& f : p.signature())
    if (f.arity == 0 && !constant) constant = f.name;
  std::vector<Term> out;
  if (!constant) return out;
  for (const ProbRule& r : p.rules()) {
    Substitution s;
    for (const std::string& x : variables(r.lhs)) s.emplace(x, Term::app(*constant));
    out.push_back(substitute(s, r.lhs));
  }
  return out;
}

}  // namespace prost::testing
