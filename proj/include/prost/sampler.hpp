#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "prost/rewrite.hpp"

namespace prost {

// Mutable single-path sampler for the deterministic position-local
// schedulers. Rewriting happens in place on an arena tree whose nodes carry
// their first matching rule and a "contains a redex" flag, so one step costs
// the depth of the redex instead of a rebuild of the hash-consed path.
// Choices and random draws are identical to the term-based sampler.
class ArenaSampler {
 public:
  ArenaSampler(const Ptrs& p, Strategy s, SchedulerPolicy policy) : p_(p), s_(s), policy_(policy) {
    if (!supports(s, policy)) throw Error("usage-error", "arena sampler needs f, i or li with first or rightmost");
    for (const Symbol& f : p.signature()) intern(f.name);
    for (const ProbRule& r : p.rules()) {
      lhs_.push_back(compile(r.lhs));
      std::vector<Pattern> rhs;
      for (const Branch& b : r.rhs) rhs.push_back(compile(b.term));
      rhs_.push_back(std::move(rhs));
    }
    for (const ProbRule& r : p.rules()) {
      nonlinear_ = nonlinear_ || !is_linear(r.lhs);
      lhs_depth_ = std::max(lhs_depth_, depth_of(r.lhs));
    }
    by_root_.resize(names_.size());
    for (const ProbRule& r : p.rules()) by_root_[static_cast<std::size_t>(intern(r.lhs.name()))].push_back(r.index);
  }

  static bool supports(Strategy s, SchedulerPolicy policy) {
    return policy.position_local() && s != Strategy::SimultaneousInnermost;
  }

  void reset(const Term& t) {
    nodes_.clear();
    free_.clear();
    root_ = build(t, -1);
  }

  // Returns false when no redex is left.
  bool step(double u) {
    int at = choose();
    if (at < 0) return false;
    std::size_t rule = static_cast<std::size_t>(nodes_[static_cast<std::size_t>(at)].rule);
    const auto& mu = p_.rule(rule).rhs;
    std::size_t k = 0;
    double acc = 0;
    for (; k + 1 < mu.size(); ++k) {
      acc += to_double(mu[k].p);
      if (u < acc) break;
    }
    rewrite(at, rule, k);
    return true;
  }

  bool has_redex() const { return nodes_[static_cast<std::size_t>(root_)].redex; }

  Term term() const { return to_term(root_); }

 private:
  struct Pattern {
    bool var = false;
    int sym = 0;
    int slot = 0;  // variable slot when var
    std::vector<Pattern> kids;
  };

  struct Node {
    int sym = 0;
    bool var = false;
    int parent = -1;
    int rule = -1;       // first matching rule, -1 if none
    bool redex = false;  // some redex in this subtree
    std::size_t hash = 0;
    std::vector<int> kids;
  };

  static std::size_t depth_of(const Term& t) {
    std::size_t d = 0;
    for (const Term& a : t.args()) d = std::max(d, 1 + depth_of(a));
    return d;
  }

  int intern(const std::string& name) {
    auto [it, fresh] = ids_.try_emplace(name, static_cast<int>(names_.size()));
    if (fresh) names_.push_back(name);
    return it->second;
  }

  Pattern compile(const Term& t) {
    Pattern pt;
    if (t.is_var()) {
      pt.var = true;
      auto [it, fresh] = slots_.try_emplace(t.name(), static_cast<int>(slots_.size()));
      pt.slot = it->second;
      return pt;
    }
    pt.sym = intern(t.name());
    for (const Term& a : t.args()) pt.kids.push_back(compile(a));
    return pt;
  }

  int alloc() {
    if (!free_.empty()) {
      int id = free_.back();
      free_.pop_back();
      Node& n = nodes_[static_cast<std::size_t>(id)];
      n.kids.clear();
      return id;
    }
    nodes_.emplace_back();
    return static_cast<int>(nodes_.size() - 1);
  }

  Node& at(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& at(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

  void refresh(int id) {
    Node& n = at(id);
    std::size_t h = detail::mix(static_cast<std::size_t>(n.sym) * 2 + (n.var ? 1 : 0), 0x51ed27);
    bool below = false;
    for (int k : n.kids) {
      h = detail::mix(h, at(k).hash);
      below = below || at(k).redex;
    }
    n.hash = h;
    n.rule = n.var ? -1 : first_match(id);
    n.redex = below || n.rule >= 0;
  }

  int build(const Term& t, int parent) {
    int id = alloc();
    {
      Node& n = at(id);
      n.var = t.is_var();
      n.sym = n.var ? -1 - intern(t.name()) : intern(t.name());
      n.parent = parent;
    }
    for (const Term& a : t.args()) {
      int k = build(a, id);
      at(id).kids.push_back(k);
    }
    refresh(id);
    return id;
  }

  Term to_term(int id) const {
    const Node& n = at(id);
    if (n.var) return Term::var(names_[static_cast<std::size_t>(-1 - n.sym)]);
    std::vector<Term> args;
    for (int k : n.kids) args.push_back(to_term(k));
    return Term::app(names_[static_cast<std::size_t>(n.sym)], std::move(args));
  }

  bool same(int a, int b) const {
    if (a == b) return true;
    const Node& x = at(a);
    const Node& y = at(b);
    if (x.hash != y.hash || x.sym != y.sym || x.var != y.var || x.kids.size() != y.kids.size()) return false;
    for (std::size_t i = 0; i < x.kids.size(); ++i)
      if (!same(x.kids[i], y.kids[i])) return false;
    return true;
  }

  bool match(const Pattern& pt, int id) {
    if (pt.var) {
      int& b = binding_[static_cast<std::size_t>(pt.slot)];
      if (b < 0) {
        b = id;
        return true;
      }
      return same(b, id);
    }
    const Node& n = at(id);
    if (n.var || n.sym != pt.sym || n.kids.size() != pt.kids.size()) return false;
    for (std::size_t i = 0; i < pt.kids.size(); ++i)
      if (!match(pt.kids[i], n.kids[i])) return false;
    return true;
  }

  int first_match(int id) {
    std::size_t s = static_cast<std::size_t>(at(id).sym);
    if (s >= by_root_.size()) return -1;
    for (std::size_t r : by_root_[s]) {
      binding_.assign(slots_.size(), -1);
      if (match(lhs_[r], id)) return static_cast<int>(r);
    }
    return -1;
  }

  int choose() const {
    int u = root_;
    if (!at(u).redex) return -1;
    bool right = policy_.kind == SchedulerPolicy::RightmostInnermost && s_ != Strategy::LeftmostInnermost;
    while (true) {
      const Node& n = at(u);
      if (s_ == Strategy::Full && !right && n.rule >= 0) return u;
      int next = -1;
      std::size_t m = n.kids.size();
      for (std::size_t k = 0; k < m; ++k) {
        int c = n.kids[right ? m - 1 - k : k];
        if (at(c).redex) {
          next = c;
          break;
        }
      }
      if (next < 0) return u;
      u = next;
    }
  }

  int copy(int id, int parent) {
    int c = alloc();
    Node& src = at(id);
    {
      Node& n = at(c);
      n.sym = src.sym;
      n.var = src.var;
      n.parent = parent;
      n.rule = src.rule;
      n.redex = src.redex;
      n.hash = src.hash;
    }
    std::size_t m = at(id).kids.size();
    for (std::size_t i = 0; i < m; ++i) {
      int k = copy(at(id).kids[i], c);
      at(c).kids.push_back(k);
    }
    return c;
  }

  void release(int id) {
    for (int k : at(id).kids) release(k);
    free_.push_back(id);
  }

  int instantiate(const Pattern& pt, int parent, std::vector<char>& used) {
    if (pt.var) {
      std::size_t s = static_cast<std::size_t>(pt.slot);
      int b = bound_[s];
      if (!used[s]) {
        used[s] = 1;
        at(b).parent = parent;
        return b;
      }
      return copy(b, parent);
    }
    int id = alloc();
    at(id).sym = pt.sym;
    at(id).var = false;
    at(id).parent = parent;
    for (const Pattern& k : pt.kids) {
      int c = instantiate(k, id, used);
      at(id).kids.push_back(c);
    }
    refresh(id);
    return id;
  }

  // Marks, for non-linear lhs variables, which occurrence is the bound node.
  void collect_bound(const Pattern& pt, int id, std::vector<char>& seen, std::vector<int>& firsts) {
    if (pt.var) {
      std::size_t s = static_cast<std::size_t>(pt.slot);
      if (!seen[s]) {
        seen[s] = 1;
        firsts[s] = id;
      }
      return;
    }
    for (std::size_t i = 0; i < pt.kids.size(); ++i) collect_bound(pt.kids[i], at(id).kids[i], seen, firsts);
  }

  void release_lhs(const Pattern& pt, int id, const std::vector<char>& used, const std::vector<int>& firsts) {
    if (pt.var) {
      std::size_t s = static_cast<std::size_t>(pt.slot);
      if (!used[s] || firsts[s] != id) release(id);
      return;
    }
    for (std::size_t i = 0; i < pt.kids.size(); ++i) release_lhs(pt.kids[i], at(id).kids[i], used, firsts);
    free_.push_back(id);
  }

  void rewrite(int id, std::size_t rule, std::size_t branch) {
    const Pattern& lhs = lhs_[rule];
    std::vector<char> seen(slots_.size(), 0);
    bound_.assign(slots_.size(), -1);
    collect_bound(lhs, id, seen, bound_);
    std::vector<char> used(slots_.size(), 0);
    int parent = at(id).parent;
    int fresh = instantiate(rhs_[rule][branch], parent, used);
    release_lhs(lhs, id, used, bound_);
    if (parent < 0) {
      root_ = fresh;
      return;
    }
    for (int& k : at(parent).kids)
      if (k == id) {
        k = fresh;
        break;
      }
    std::size_t d = 1;
    for (int u = parent; u >= 0; u = at(u).parent, ++d) {
      if (nonlinear_ || d <= lhs_depth_) {
        refresh(u);
        continue;
      }
      Node& n = at(u);
      bool below = false;
      for (int k : n.kids) below = below || at(k).redex;
      bool redex = below || n.rule >= 0;
      if (redex == n.redex) break;
      n.redex = redex;
    }
  }

  const Ptrs& p_;
  Strategy s_;
  SchedulerPolicy policy_;
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> slots_;
  std::vector<Pattern> lhs_;
  std::vector<std::vector<Pattern>> rhs_;
  std::vector<std::vector<std::size_t>> by_root_;
  std::vector<Node> nodes_;
  std::vector<int> free_;
  std::vector<int> binding_, bound_;
  int root_ = -1;
  bool nonlinear_ = false;  // equal-subterm checks need fresh hashes everywhere
  std::size_t lhs_depth_ = 0;
};

}  // namespace prost
