#pragma once

#include <algorithm>
#include <map>
#include <unordered_map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "prost/rewrite.hpp"

namespace prost {

struct Linearity {
  bool left_linear = true;
  bool right_linear = true;
  bool non_erasing = true;
};

inline Linearity check_linearities(const Ptrs& p) {
  Linearity l;
  for (const ProbRule& r : p.rules()) {
    if (!is_linear(r.lhs)) l.left_linear = false;
    std::vector<std::string> lv = variables(r.lhs);
    for (const Branch& b : r.rhs) {
      if (!is_linear(b.term)) l.right_linear = false;
      for (const std::string& x : lv)
        if (!occurs(x, b.term)) l.non_erasing = false;
    }
  }
  return l;
}

struct Overlap {
  std::size_t outer = 0;  // rule whose lhs contains the position
  std::size_t inner = 0;  // rule unified at that position (variables renamed)
  Position position;
  Substitution unifier;
  bool at_root() const { return position.empty(); }
};

inline const std::string kRenameSuffix = "_r";

inline std::vector<Overlap> critical_overlaps(const Ptrs& p) {
  std::vector<Overlap> out;
  std::vector<Term> renamed;
  for (const ProbRule& r : p.rules()) renamed.push_back(rename_vars(r.lhs, kRenameSuffix));
  for (const ProbRule& outer : p.rules())
    for (const Position& pi : positions(outer.lhs)) {
      const Term& sub = subterm_at(outer.lhs, pi);
      if (sub.is_var()) continue;
      for (const ProbRule& inner : p.rules()) {
        if (inner.index == outer.index && pi.empty()) continue;
        if (auto mgu = unify(sub, renamed[inner.index])) out.push_back({outer.index, inner.index, pi, std::move(*mgu)});
      }
    }
  return out;
}

struct OverlapFlags {
  bool non_overlapping = true;
  bool overlay = true;
  bool orthogonal = true;
};

inline OverlapFlags check_no_os_or(const std::vector<Overlap>& overlaps, bool left_linear) {
  OverlapFlags f;
  f.non_overlapping = overlaps.empty();
  for (const Overlap& o : overlaps)
    if (!o.at_root()) f.overlay = false;
  f.orthogonal = f.non_overlapping && left_linear;
  return f;
}

// ---------------------------------------------------------------------------
// Bounded local confluence for classical systems

enum class Tri { Yes, No, Unknown };

inline const char* to_string(Tri t) {
  switch (t) {
    case Tri::Yes: return "yes";
    case Tri::No: return "no";
    case Tri::Unknown: return "unknown";
  }
  return "?";
}

struct CriticalPair {
  Overlap overlap;
  Term peak, left, right;
};

inline std::vector<CriticalPair> critical_pairs(const Ptrs& p) {
  if (!p.trivial_probabilities()) throw Error("not-a-trs", "critical pairs need trivial probabilities");
  std::vector<CriticalPair> out;
  for (Overlap& o : critical_overlaps(p)) {
    const ProbRule& outer = p.rule(o.outer);
    const ProbRule& inner = p.rule(o.inner);
    Term peak = substitute(o.unifier, outer.lhs);
    Term inner_rhs = substitute(o.unifier, rename_vars(inner.rhs.front().term, kRenameSuffix));
    Term left = replace_at(peak, o.position, inner_rhs);
    Term right = substitute(o.unifier, outer.rhs.front().term);
    out.push_back({std::move(o), peak, left, right});
  }
  return out;
}

namespace detail {

struct Reach {
  std::unordered_set<Term> seen;
  bool closed = false;  // no unexplored successors remain
};

inline Reach reach(const Ptrs& p, const Term& t, std::size_t depth) {
  Reach r;
  r.seen.insert(t);
  std::vector<Term> level{t};
  for (std::size_t d = 0; d < depth && !level.empty(); ++d) {
    std::vector<Term> next;
    for (const Term& u : level)
      for (const Redex& x : enumerate_redexes(u, p, Strategy::Full))
        for (const Branch& b : apply_redex(u, x, p))
          if (r.seen.insert(b.term).second) next.push_back(b.term);
    level = std::move(next);
  }
  r.closed = level.empty() ||
             std::all_of(level.begin(), level.end(), [&](const Term& u) { return p.is_normal_form(u); });
  return r;
}

}  // namespace detail

inline Tri check_wcr_bounded(const Ptrs& p, std::size_t depth) {
  if (!p.trivial_probabilities()) throw Error("not-a-trs", "local confluence is checked for classical systems only");
  Tri verdict = Tri::Yes;
  for (const CriticalPair& cp : critical_pairs(p)) {
    if (cp.left == cp.right) continue;
    detail::Reach a = detail::reach(p, cp.left, depth);
    detail::Reach b = detail::reach(p, cp.right, depth);
    bool meet = std::any_of(a.seen.begin(), a.seen.end(), [&](const Term& u) { return b.seen.count(u) > 0; });
    if (meet) continue;
    if (a.closed && b.closed) return Tri::No;
    verdict = Tri::Unknown;
  }
  return verdict;
}

// ---------------------------------------------------------------------------
// Spareness

struct SpareVerdict {
  enum Kind { Yes, NoWitness, Unknown } kind = Unknown;
  std::string justification;
};

inline const char* to_string(SpareVerdict::Kind k) {
  switch (k) {
    case SpareVerdict::Yes: return "yes";
    case SpareVerdict::NoWitness: return "no-witness";
    case SpareVerdict::Unknown: return "unknown";
  }
  return "?";
}

// Variables occurring more than once in some branch of the rule.
inline std::set<std::string> duplicated_vars(const ProbRule& r) {
  std::set<std::string> out;
  for (const Branch& b : r.rhs) {
    std::map<std::string, int> c;
    count_vars(b.term, c);
    for (const auto& [x, n] : c)
      if (n > 1) out.insert(x);
  }
  return out;
}

inline std::vector<Symbol> duplicating_symbols(const Ptrs& p) {
  std::vector<Symbol> out;
  for (const ProbRule& r : p.rules()) {
    if (duplicated_vars(r).empty()) continue;
    Symbol f{r.lhs.name(), r.lhs.arity()};
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  return out;
}

namespace detail {

inline bool ground_constructor(const Ptrs& p, const Term& t) { return t.is_ground() && p.is_constructor_term(t); }

inline bool occurrences_ground(const Ptrs& p, const Term& t, const std::set<std::string>& dup) {
  if (t.is_var()) return true;
  if (dup.count(t.name()))
    for (const Term& a : t.args())
      if (!ground_constructor(p, a)) return false;
  for (const Term& a : t.args())
    if (!occurrences_ground(p, a, dup)) return false;
  return true;
}

}  // namespace detail

// A step is spare when every variable duplicated by some branch is bound to
// a normal form.
inline bool spare_step(const Ptrs& p, const Redex& r) {
  for (const std::string& x : duplicated_vars(p.rule(r.rule))) {
    auto it = r.sigma.find(x);
    if (it != r.sigma.end() && !p.is_normal_form(it->second)) return false;
  }
  return true;
}

struct SpareWitness {
  Term start;
  std::vector<Term> path;  // start ... term where the non-spare step applies
  Redex step;
};

// Bounded search for a non-spare full rewrite sequence from a basic term.
inline std::optional<SpareWitness> find_non_spare(const Ptrs& p, std::size_t start_size, std::size_t depth,
                                                  std::size_t state_budget = 50'000) {
  for (const Term& s : basic_terms(p, start_size)) {
    std::unordered_map<Term, Term> parent;
    parent.emplace(s, Term());
    std::vector<Term> level{s};
    for (std::size_t d = 0; d <= depth && !level.empty(); ++d) {
      std::vector<Term> next;
      for (const Term& u : level)
        for (const Redex& r : enumerate_redexes(u, p, Strategy::Full)) {
          if (!spare_step(p, r)) {
            SpareWitness w{s, {}, r};
            for (Term v = u; !v.is_null(); v = parent[v]) w.path.insert(w.path.begin(), v);
            return w;
          }
          if (d == depth) continue;
          for (const Branch& b : apply_redex(u, r, p))
            if (parent.size() < state_budget && parent.emplace(b.term, u).second) next.push_back(b.term);
        }
      level = std::move(next);
    }
  }
  return std::nullopt;
}

struct SpareOptions {
  bool search = false;
  std::size_t start_size = 5;
  std::size_t depth = 6;
};

inline SpareVerdict check_spare(const Ptrs& p, const SpareOptions& opt = {}) {
  if (check_linearities(p).right_linear) return {SpareVerdict::Yes, "right-linear"};
  std::set<std::string> dup;
  for (const Symbol& f : duplicating_symbols(p)) dup.insert(f.name);
  bool ground = true;
  for (const ProbRule& r : p.rules())
    for (const Branch& b : r.rhs)
      if (!detail::occurrences_ground(p, b.term, dup)) ground = false;
  if (ground) return {SpareVerdict::Yes, "ground-constructor-arguments"};
  if (opt.search) {
    if (auto w = find_non_spare(p, opt.start_size, opt.depth)) {
      std::string path;
      for (std::size_t i = 0; i < w->path.size(); ++i) path += (i ? " -> " : "") + w->path[i].str();
      return {SpareVerdict::NoWitness, "non-spare step " + to_string(w->step) + " after " + path};
    }
  }
  return {SpareVerdict::Unknown, "duplicating symbol with non-ground arguments in a right-hand side"};
}

// ---------------------------------------------------------------------------

struct PropertyReport {
  bool left_linear = true, right_linear = true, linear = true, non_erasing = true;
  bool non_overlapping = true, overlay = true, orthogonal = true;
  bool trivial = true;  // every support is a singleton
  SpareVerdict spare;
  std::optional<Tri> wcr;  // only for classical systems
  std::size_t wcr_depth = 0;
  std::vector<Overlap> overlaps;
  std::vector<Symbol> duplicating;
};

struct CheckOptions {
  std::size_t wcr_depth = 3;
  SpareOptions spare;
};

inline PropertyReport check_properties(const Ptrs& p, const CheckOptions& opt = {}) {
  PropertyReport r;
  Linearity l = check_linearities(p);
  r.left_linear = l.left_linear;
  r.right_linear = l.right_linear;
  r.non_erasing = l.non_erasing;
  r.linear = l.left_linear && l.right_linear;
  r.overlaps = critical_overlaps(p);
  OverlapFlags f = check_no_os_or(r.overlaps, l.left_linear);
  r.non_overlapping = f.non_overlapping;
  r.overlay = f.overlay;
  r.orthogonal = f.orthogonal;
  r.trivial = p.trivial_probabilities();
  r.spare = check_spare(p, opt.spare);
  r.duplicating = duplicating_symbols(p);
  if (r.trivial) {
    r.wcr = check_wcr_bounded(p, opt.wcr_depth);
    r.wcr_depth = opt.wcr_depth;
  }
  return r;
}

}  // namespace prost
