#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "prost/ptrs.hpp"

namespace prost {

enum class Strategy { Full, Innermost, LeftmostInnermost, SimultaneousInnermost };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::Full: return "f";
    case Strategy::Innermost: return "i";
    case Strategy::LeftmostInnermost: return "li";
    case Strategy::SimultaneousInnermost: return "sim";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& s) {
  if (s == "f" || s == "full") return Strategy::Full;
  if (s == "i" || s == "innermost") return Strategy::Innermost;
  if (s == "li" || s == "leftmost-innermost") return Strategy::LeftmostInnermost;
  if (s == "sim" || s == "simultaneous") return Strategy::SimultaneousInnermost;
  throw Error("usage-error", "unknown strategy '" + s + "'");
}

struct Redex {
  std::vector<Position> positions;  // pairwise parallel, sorted
  std::size_t rule = 0;
  Substitution sigma;
};

inline std::string to_string(const Redex& r) {
  std::string s = "{";
  for (std::size_t i = 0; i < r.positions.size(); ++i) s += (i ? "," : "") + to_string(r.positions[i]);
  return s + "} rule " + std::to_string(r.rule + 1) + " " + to_string(r.sigma);
}

struct SchedulerPolicy {
  enum Kind { FirstLexicographic, RightmostInnermost, RandomUniform, ExhaustiveBranch } kind = FirstLexicographic;
  std::uint64_t seed = 0;

  static SchedulerPolicy first() { return {FirstLexicographic, 0}; }
  static SchedulerPolicy rightmost() { return {RightmostInnermost, 0}; }
  static SchedulerPolicy random(std::uint64_t seed) { return {RandomUniform, seed}; }
  static SchedulerPolicy exhaustive() { return {ExhaustiveBranch, 0}; }

  // Choices that depend only on the chosen subterm's own shape.
  bool position_local() const { return kind == FirstLexicographic || kind == RightmostInnermost; }
};

inline const char* to_string(SchedulerPolicy::Kind k) {
  switch (k) {
    case SchedulerPolicy::FirstLexicographic: return "first";
    case SchedulerPolicy::RightmostInnermost: return "rightmost";
    case SchedulerPolicy::RandomUniform: return "random";
    case SchedulerPolicy::ExhaustiveBranch: return "exhaustive";
  }
  return "?";
}

inline SchedulerPolicy parse_scheduler(const std::string& s, std::uint64_t seed = 0) {
  if (s == "first") return SchedulerPolicy::first();
  if (s == "rightmost") return SchedulerPolicy::rightmost();
  if (s == "random") return SchedulerPolicy::random(seed);
  if (s == "exhaustive") return SchedulerPolicy::exhaustive();
  throw Error("usage-error", "unknown scheduler '" + s + "'");
}

namespace detail {

inline void root_matches(const Term& u, const Ptrs& p, const Position& pos, std::vector<Redex>& out) {
  for (std::size_t i : p.rules_with_root(u.name()))
    if (auto s = match_term(p.rule(i).lhs, u)) out.push_back({{pos}, i, std::move(*s)});
}

inline void all_redexes(const Term& u, const Ptrs& p, Position& pos, std::vector<Redex>& out) {
  if (p.is_normal_form(u)) return;
  root_matches(u, p, pos, out);
  for (unsigned i = 0; i < u.arity(); ++i) {
    pos.push_back(i + 1);
    all_redexes(u.arg(i), p, pos, out);
    pos.pop_back();
  }
}

inline bool children_nf(const Term& u, const Ptrs& p) {
  for (const Term& a : u.args())
    if (!p.is_normal_form(a)) return false;
  return true;
}

inline void innermost_redexes(const Term& u, const Ptrs& p, Position& pos, std::vector<Redex>& out) {
  if (p.is_normal_form(u)) return;
  if (children_nf(u, p)) {
    root_matches(u, p, pos, out);
    return;
  }
  for (unsigned i = 0; i < u.arity(); ++i) {
    pos.push_back(i + 1);
    innermost_redexes(u.arg(i), p, pos, out);
    pos.pop_back();
  }
}

// Lexicographic key: first position, then rule, then larger groups first.
inline bool lex_before(const Redex& a, const Redex& b) {
  if (a.positions.front() != b.positions.front()) return a.positions.front() < b.positions.front();
  if (a.rule != b.rule) return a.rule < b.rule;
  return a.positions.size() > b.positions.size();
}

// Deeper beats above; right beats left.
inline bool right_inner_before(const Position& a, const Position& b) {
  switch (compare_positions(a, b)) {
    case PosRelation::Below:
    case PosRelation::RightParallel: return true;
    default: return false;
  }
}

inline bool rightmost_before(const Redex& a, const Redex& b) {
  const Position& pa = a.positions.back();
  const Position& pb = b.positions.back();
  if (pa != pb) return right_inner_before(pa, pb);
  if (a.rule != b.rule) return a.rule < b.rule;
  return a.positions.size() > b.positions.size();
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Redexes of t under strategy s. For the simultaneous strategy the default
// listing is every singleton innermost redex followed by every maximal group
// of equal innermost redexes; `all_subsets` also lists every sub-group.
inline std::vector<Redex> enumerate_redexes(const Term& t, const Ptrs& p, Strategy s, bool all_subsets = false) {
  std::vector<Redex> out;
  Position pos;
  switch (s) {
    case Strategy::Full:
      detail::all_redexes(t, p, pos, out);
      return out;
    case Strategy::Innermost:
      detail::innermost_redexes(t, p, pos, out);
      return out;
    case Strategy::LeftmostInnermost: {
      detail::innermost_redexes(t, p, pos, out);
      if (out.empty()) return out;
      Position first = out.front().positions.front();
      std::erase_if(out, [&](const Redex& r) { return r.positions.front() != first; });
      return out;
    }
    case Strategy::SimultaneousInnermost: {
      detail::innermost_redexes(t, p, pos, out);
      std::map<std::pair<const detail::Node*, std::size_t>, std::vector<std::size_t>> groups;
      std::vector<std::pair<const detail::Node*, std::size_t>> order;
      for (std::size_t k = 0; k < out.size(); ++k) {
        auto key = std::make_pair(subterm_at(t, out[k].positions.front()).id(), out[k].rule);
        auto [it, fresh] = groups.try_emplace(key);
        if (fresh) order.push_back(key);
        it->second.push_back(k);
      }
      std::vector<Redex> extra;
      for (const auto& key : order) {
        const auto& members = groups[key];
        if (members.size() < 2) continue;
        if (!all_subsets) {
          Redex g{{}, out[members.front()].rule, out[members.front()].sigma};
          for (std::size_t k : members) g.positions.push_back(out[k].positions.front());
          extra.push_back(std::move(g));
          continue;
        }
        if (members.size() > 16) throw Error("subset-limit", "more than 16 equal redexes");
        std::vector<Redex> subs;
        for (std::uint32_t mask = 1; mask < (1u << members.size()); ++mask) {
          if (std::popcount(mask) < 2) continue;
          Redex g{{}, out[members.front()].rule, out[members.front()].sigma};
          for (std::size_t b = 0; b < members.size(); ++b)
            if (mask & (1u << b)) g.positions.push_back(out[members[b]].positions.front());
          subs.push_back(std::move(g));
        }
        std::sort(subs.begin(), subs.end(), [](const Redex& a, const Redex& b) {
          if (a.positions.size() != b.positions.size()) return a.positions.size() > b.positions.size();
          return a.positions < b.positions;
        });
        for (auto& g : subs) extra.push_back(std::move(g));
      }
      for (auto& g : extra) out.push_back(std::move(g));
      return out;
    }
  }
  return out;
}

inline MultiDistribution apply_redex(const Term& t, const Redex& r, const Ptrs& p) {
  if (r.positions.empty()) throw Error("invalid-redex", "no positions in redex for " + t.str());
  if (r.rule >= p.size()) throw Error("invalid-redex", "rule index out of range");
  const ProbRule& rule = p.rule(r.rule);
  Term instance = substitute(r.sigma, rule.lhs);
  for (std::size_t i = 0; i < r.positions.size(); ++i) {
    const Position& pi = r.positions[i];
    Term sub;
    try {
      sub = subterm_at(t, pi);
    } catch (const Error&) {
      throw Error("invalid-redex", "position " + to_string(pi) + " not in " + t.str());
    }
    if (sub != instance)
      throw Error("invalid-redex", "subterm at " + to_string(pi) + " is not an instance of rule " +
                                       std::to_string(r.rule + 1));
    for (std::size_t j = 0; j < i; ++j)
      if (!parallel(pi, r.positions[j])) throw Error("invalid-redex", "positions not parallel");
  }
  MultiDistribution mu;
  mu.reserve(rule.rhs.size());
  for (const Branch& b : rule.rhs) {
    Term rhs = substitute(r.sigma, b.term);
    Term u = t;
    for (const Position& pi : r.positions) u = replace_at(u, pi, rhs);
    mu.push_back({b.p, u});
  }
  return mu;
}

// Stateful scheduler; RandomUniform carries its own generator.
class Scheduler {
 public:
  explicit Scheduler(SchedulerPolicy policy) : policy_(policy), rng_(detail::splitmix64(policy.seed)) {}
  Scheduler(SchedulerPolicy policy, std::uint64_t stream) : policy_(policy), rng_(detail::splitmix64(stream)) {}

  const SchedulerPolicy& policy() const { return policy_; }

  std::optional<Redex> choose(const std::vector<Redex>& redexes) {
    if (policy_.kind == SchedulerPolicy::ExhaustiveBranch)
      throw Error("exhaustive-not-schedulable", "exhaustive branching is handled by the explorer");
    if (redexes.empty()) return std::nullopt;
    switch (policy_.kind) {
      case SchedulerPolicy::FirstLexicographic:
        return *std::min_element(redexes.begin(), redexes.end(), detail::lex_before);
      case SchedulerPolicy::RightmostInnermost:
        return *std::min_element(redexes.begin(), redexes.end(), detail::rightmost_before);
      case SchedulerPolicy::RandomUniform: {
        std::uniform_int_distribution<std::size_t> pick(0, redexes.size() - 1);
        return redexes[pick(rng_)];
      }
      default: break;
    }
    return std::nullopt;
  }

  // Same choice as choose(enumerate_redexes(t, p, s)) without building the
  // whole list when the policy allows a direct descent.
  std::optional<Redex> pick(const Term& t, const Ptrs& p, Strategy s) {
    if (p.is_normal_form(t)) {
      if (policy_.kind == SchedulerPolicy::ExhaustiveBranch) return choose({});
      return std::nullopt;
    }
    bool first = policy_.kind == SchedulerPolicy::FirstLexicographic;
    bool right = policy_.kind == SchedulerPolicy::RightmostInnermost;
    if (first && s == Strategy::Full) return first_outermost(t, p);
    if ((first && s != Strategy::SimultaneousInnermost) || (right && s == Strategy::LeftmostInnermost))
      return descend(t, p, false);
    if (right && s != Strategy::SimultaneousInnermost) return descend(t, p, true);
    return choose(enumerate_redexes(t, p, s));
  }

 private:
  static std::optional<Redex> at_root(const Term& u, const Ptrs& p, const Position& pos) {
    for (std::size_t i : p.rules_with_root(u.name()))
      if (auto sg = match_term(p.rule(i).lhs, u)) return Redex{{pos}, i, std::move(*sg)};
    return std::nullopt;
  }

  static std::optional<Redex> first_outermost(const Term& t, const Ptrs& p) {
    Position pos;
    const Term* u = &t;
    while (true) {
      if (auto r = at_root(*u, p, pos)) return r;
      unsigned k = 0;
      while (p.is_normal_form(u->arg(k))) ++k;
      pos.push_back(k + 1);
      u = &u->arg(k);
    }
  }

  static std::optional<Redex> descend(const Term& t, const Ptrs& p, bool from_right) {
    Position pos;
    const Term* u = &t;
    while (true) {
      std::optional<unsigned> next;
      for (unsigned k = 0; k < u->arity(); ++k) {
        unsigned idx = from_right ? u->arity() - 1 - k : k;
        if (!p.is_normal_form(u->arg(idx))) {
          next = idx;
          break;
        }
      }
      if (!next) return at_root(*u, p, pos);
      pos.push_back(*next + 1);
      u = &u->arg(*next);
    }
  }

  SchedulerPolicy policy_;
  std::mt19937_64 rng_;
};

inline std::optional<Redex> schedule(const Term&, const std::vector<Redex>& redexes, SchedulerPolicy policy) {
  Scheduler s(policy);
  return s.choose(redexes);
}

}  // namespace prost
