#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "prost/error.hpp"

namespace prost {

class Term;

namespace detail {

struct Node {
  std::string name;
  bool var = false;
  std::vector<Term> args;
  std::size_t hash = 0;
  std::uint64_t size = 1;
  bool ground = true;
  // Normal-form memo: (owner id << 1) | verdict, 0 when unknown.
  mutable std::atomic<std::uint64_t> nf_tag{0};
};

}  // namespace detail

// Immutable first-order term. Nodes are hash-consed, so two terms are
// structurally equal exactly when they share a node.
class Term {
 public:
  Term() = default;

  static Term var(std::string name);
  static Term app(std::string name, std::vector<Term> args = {});

  bool is_null() const noexcept { return !node_; }
  bool is_var() const noexcept { return node_->var; }
  const std::string& name() const noexcept { return node_->name; }
  const std::vector<Term>& args() const noexcept { return node_->args; }
  std::size_t arity() const noexcept { return node_->args.size(); }
  const Term& arg(std::size_t i) const { return node_->args[i]; }

  // Saturates at UINT64_MAX; shared subterms count once per occurrence.
  std::uint64_t size() const noexcept { return node_->size; }
  bool is_ground() const noexcept { return node_->ground; }
  std::size_t hash() const noexcept { return node_->hash; }
  const detail::Node* id() const noexcept { return node_.get(); }

  std::string str() const;

  friend bool operator==(const Term& a, const Term& b) noexcept { return a.node_ == b.node_; }
  friend bool operator!=(const Term& a, const Term& b) noexcept { return a.node_ != b.node_; }

 private:
  explicit Term(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::Node> node_;

  friend class detail_pool_access;
};

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept { return t.hash(); }
};

class detail_pool_access {
 public:
  static Term make(std::string name, bool var, std::vector<Term> args);
};

namespace detail {

inline std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

class Pool {
 public:
  static Pool& instance() {
    static Pool* p = new Pool();  // never destroyed: terms may outlive static teardown
    return *p;
  }

  std::shared_ptr<const Node> get(std::string&& name, bool var, std::vector<Term>&& args) {
    std::size_t h = mix(std::hash<std::string>{}(name), var ? 0x51ed27 : 0x2545f491);
    for (const Term& a : args) h = mix(h, a.hash());
    std::lock_guard<std::mutex> lk(mu_);
    auto [b, e] = table_.equal_range(h);
    for (auto it = b; it != e; ++it) {
      if (auto sp = it->second.lock()) {
        if (sp->var == var && sp->name == name && sp->args == args) return sp;
      }
    }
    auto* n = new Node();
    n->name = std::move(name);
    n->var = var;
    n->hash = h;
    n->ground = !var;
    std::uint64_t size = 1;
    for (const Term& a : args) {
      std::uint64_t s = a.size();
      size = (size > UINT64_MAX - s) ? UINT64_MAX : size + s;
      n->ground = n->ground && a.is_ground();
    }
    n->size = size;
    n->args = std::move(args);
    std::shared_ptr<const Node> sp(n, [](const Node* dead) {
      Pool::instance().release(dead);
      delete dead;
    });
    table_.emplace(h, sp);
    return sp;
  }

  std::size_t live() {
    std::lock_guard<std::mutex> lk(mu_);
    return table_.size();
  }

 private:
  void release(const Node* n) {
    std::lock_guard<std::mutex> lk(mu_);
    auto [b, e] = table_.equal_range(n->hash);
    for (auto it = b; it != e;) {
      if (it->second.expired()) it = table_.erase(it);
      else ++it;
    }
  }

  std::mutex mu_;
  std::unordered_multimap<std::size_t, std::weak_ptr<const Node>> table_;
};

}  // namespace detail

inline Term detail_pool_access::make(std::string name, bool var, std::vector<Term> args) {
  return Term(detail::Pool::instance().get(std::move(name), var, std::move(args)));
}

inline Term Term::var(std::string name) { return detail_pool_access::make(std::move(name), true, {}); }

inline Term Term::app(std::string name, std::vector<Term> args) {
  return detail_pool_access::make(std::move(name), false, std::move(args));
}

inline void write_term(std::string& out, const Term& t) {
  out += t.name();
  if (t.is_var() || t.arity() == 0) return;
  out += '(';
  for (std::size_t i = 0; i < t.arity(); ++i) {
    if (i) out += ',';
    write_term(out, t.arg(i));
  }
  out += ')';
}

inline std::string Term::str() const {
  std::string s;
  write_term(s, *this);
  return s;
}

// Total structural order: variables before applications, then name, arity,
// arguments left to right. Shared subterms short-circuit.
inline int compare(const Term& a, const Term& b) {
  if (a == b) return 0;
  if (a.is_var() != b.is_var()) return a.is_var() ? -1 : 1;
  if (int c = a.name().compare(b.name())) return c < 0 ? -1 : 1;
  if (a.arity() != b.arity()) return a.arity() < b.arity() ? -1 : 1;
  for (std::size_t i = 0; i < a.arity(); ++i)
    if (int c = compare(a.arg(i), b.arg(i))) return c;
  return 0;
}

struct TermLess {
  bool operator()(const Term& a, const Term& b) const { return compare(a, b) < 0; }
};

// ---------------------------------------------------------------------------
// Positions

using Position = std::vector<unsigned>;

inline std::string to_string(const Position& p) {
  if (p.empty()) return "ε";
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(p[i]);
  }
  return s;
}

enum class PosRelation { Equal, Above, Below, LeftParallel, RightParallel };

inline const char* to_string(PosRelation r) {
  switch (r) {
    case PosRelation::Equal: return "equal";
    case PosRelation::Above: return "above";
    case PosRelation::Below: return "below";
    case PosRelation::LeftParallel: return "left-parallel";
    case PosRelation::RightParallel: return "right-parallel";
  }
  return "?";
}

inline PosRelation compare_positions(const Position& tau, const Position& pi) {
  std::size_t n = std::min(tau.size(), pi.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (tau[k] != pi[k]) return tau[k] < pi[k] ? PosRelation::LeftParallel : PosRelation::RightParallel;
  }
  if (tau.size() == pi.size()) return PosRelation::Equal;
  return tau.size() < pi.size() ? PosRelation::Above : PosRelation::Below;
}

inline bool parallel(const Position& a, const Position& b) {
  auto r = compare_positions(a, b);
  return r == PosRelation::LeftParallel || r == PosRelation::RightParallel;
}

inline const Term& subterm_at(const Term& t, const Position& pi) {
  const Term* cur = &t;
  for (unsigned i : pi) {
    if (cur->is_var() || i == 0 || i > cur->arity())
      throw Error("invalid-position", to_string(pi) + " in " + t.str());
    cur = &cur->arg(i - 1);
  }
  return *cur;
}

inline Term replace_at(const Term& t, const Position& pi, const Term& r, std::size_t from = 0) {
  if (from == pi.size()) return r;
  unsigned i = pi[from];
  if (t.is_var() || i == 0 || i > t.arity())
    throw Error("invalid-position", to_string(pi) + " in " + t.str());
  std::vector<Term> args = t.args();
  args[i - 1] = replace_at(t.arg(i - 1), pi, r, from + 1);
  return Term::app(t.name(), std::move(args));
}

inline void collect_positions(const Term& t, Position& cur, std::vector<Position>& out) {
  out.push_back(cur);
  if (t.is_var()) return;
  for (unsigned i = 0; i < t.arity(); ++i) {
    cur.push_back(i + 1);
    collect_positions(t.arg(i), cur, out);
    cur.pop_back();
  }
}

// All positions in lexicographic (pre-)order.
inline std::vector<Position> positions(const Term& t) {
  std::vector<Position> out;
  Position cur;
  collect_positions(t, cur, out);
  return out;
}

inline void collect_vars(const Term& t, std::vector<std::string>& out, std::set<std::string>& seen) {
  if (t.is_var()) {
    if (seen.insert(t.name()).second) out.push_back(t.name());
    return;
  }
  if (t.is_ground()) return;
  for (const Term& a : t.args()) collect_vars(a, out, seen);
}

// Distinct variables in left-to-right order of first occurrence.
inline std::vector<std::string> variables(const Term& t) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  collect_vars(t, out, seen);
  return out;
}

inline void count_vars(const Term& t, std::map<std::string, int>& counts) {
  if (t.is_var()) {
    ++counts[t.name()];
    return;
  }
  if (t.is_ground()) return;
  for (const Term& a : t.args()) count_vars(a, counts);
}

inline bool is_linear(const Term& t) {
  std::map<std::string, int> c;
  count_vars(t, c);
  return std::all_of(c.begin(), c.end(), [](const auto& kv) { return kv.second == 1; });
}

inline bool occurs(const std::string& x, const Term& t) {
  if (t.is_var()) return t.name() == x;
  if (t.is_ground()) return false;
  return std::any_of(t.args().begin(), t.args().end(), [&](const Term& a) { return occurs(x, a); });
}

inline bool contains_symbol(const Term& t, const std::string& f) {
  if (t.is_var()) return false;
  if (t.name() == f) return true;
  return std::any_of(t.args().begin(), t.args().end(), [&](const Term& a) { return contains_symbol(a, f); });
}

// ---------------------------------------------------------------------------
// Substitutions

using Substitution = std::map<std::string, Term>;

inline Term substitute(const Substitution& s, const Term& t) {
  if (s.empty() || t.is_ground()) return t;
  if (t.is_var()) {
    auto it = s.find(t.name());
    return it == s.end() ? t : it->second;
  }
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const Term& a : t.args()) args.push_back(substitute(s, a));
  return Term::app(t.name(), std::move(args));
}

inline std::string to_string(const Substitution& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& [x, t] : s) {
    if (!first) out += ", ";
    first = false;
    out += x + " ↦ " + t.str();
  }
  return out + "}";
}

inline bool match_into(const Term& p, const Term& s, Substitution& sigma) {
  if (p.is_var()) {
    auto [it, fresh] = sigma.emplace(p.name(), s);
    return fresh || it->second == s;
  }
  if (p.is_ground()) return p == s;
  if (s.is_var() || p.name() != s.name() || p.arity() != s.arity()) return false;
  for (std::size_t i = 0; i < p.arity(); ++i)
    if (!match_into(p.arg(i), s.arg(i), sigma)) return false;
  return true;
}

// One-way matching: only variables of the pattern are bound.
inline std::optional<Substitution> match_term(const Term& pattern, const Term& subject) {
  Substitution sigma;
  if (!match_into(pattern, subject, sigma)) return std::nullopt;
  return sigma;
}

namespace detail {

inline Term walk(const Term& t, const Substitution& b) {
  Term cur = t;
  while (cur.is_var()) {
    auto it = b.find(cur.name());
    if (it == b.end()) break;
    cur = it->second;
  }
  return cur;
}

inline bool occurs_bound(const std::string& x, const Term& t, const Substitution& b) {
  Term w = walk(t, b);
  if (w.is_var()) return w.name() == x;
  for (const Term& a : w.args())
    if (occurs_bound(x, a, b)) return true;
  return false;
}

inline Term resolve(const Term& t, const Substitution& b) {
  Term w = walk(t, b);
  if (w.is_var() || w.is_ground()) return w;
  std::vector<Term> args;
  args.reserve(w.arity());
  for (const Term& a : w.args()) args.push_back(resolve(a, b));
  return Term::app(w.name(), std::move(args));
}

}  // namespace detail

// Most general unifier with occurs-check.
inline std::optional<Substitution> unify(const Term& s, const Term& t) {
  Substitution bind;
  std::vector<std::pair<Term, Term>> todo{{s, t}};
  while (!todo.empty()) {
    auto [a, b] = todo.back();
    todo.pop_back();
    a = detail::walk(a, bind);
    b = detail::walk(b, bind);
    if (a == b) continue;
    if (a.is_var() || b.is_var()) {
      if (!a.is_var()) std::swap(a, b);
      if (detail::occurs_bound(a.name(), b, bind)) return std::nullopt;
      bind.emplace(a.name(), b);
      continue;
    }
    if (a.name() != b.name() || a.arity() != b.arity()) return std::nullopt;
    for (std::size_t i = 0; i < a.arity(); ++i) todo.emplace_back(a.arg(i), b.arg(i));
  }
  Substitution mgu;
  for (const auto& [x, v] : bind) mgu.emplace(x, detail::resolve(v, bind));
  return mgu;
}

// Monotone fresh-variable source with the reserved "_v" prefix.
class FreshVars {
 public:
  explicit FreshVars(std::string prefix = "_v") : prefix_(std::move(prefix)) {}
  std::string next_name() { return prefix_ + std::to_string(++counter_); }
  Term next() { return Term::var(next_name()); }

 private:
  std::string prefix_;
  std::uint64_t counter_ = 0;
};

inline Term rename_vars(const Term& t, const std::string& suffix) {
  Substitution s;
  for (const std::string& x : variables(t)) s.emplace(x, Term::var(x + suffix));
  return substitute(s, t);
}

}  // namespace prost

template <>
struct std::hash<prost::Term> {
  std::size_t operator()(const prost::Term& t) const noexcept { return t.hash(); }
};
