#pragma once

#include <cmath>
#include <deque>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "prost/rewrite.hpp"
#include "prost/sampler.hpp"

namespace prost {

enum class NodeKind { NormalForm, Cut, Inner };

inline const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::NormalForm: return "nf";
    case NodeKind::Cut: return "cut";
    case NodeKind::Inner: return "inner";
  }
  return "?";
}

struct RstNode {
  std::size_t id = 0;
  std::optional<std::size_t> parent;
  Rational p;
  Term term;
  std::size_t depth = 0;
  NodeKind kind = NodeKind::Inner;
};

// Rewrite-sequence tree. Per-depth masses are always kept; the node list is
// optional so deep explorations can stream levels.
struct Rst {
  Strategy strategy = Strategy::Full;
  Term start;
  std::vector<RstNode> nodes;
  std::vector<Rational> nf_mass;    // NF leaves at exactly depth n
  std::vector<Rational> open_mass;  // inner and cut nodes at exactly depth n
  std::size_t horizon = 0;          // deepest depth at which metrics are exact
  bool complete = false;            // no cut node anywhere
  bool node_limit_hit = false;
};

struct ExploreOptions {
  std::size_t max_depth = 20;
  std::size_t max_nodes = 1'000'000;
  bool merge = false;
  bool keep_nodes = true;
};

inline Rst build_rst(const Ptrs& p, const Term& start, Strategy s, SchedulerPolicy policy, const ExploreOptions& opt) {
  if (policy.kind == SchedulerPolicy::ExhaustiveBranch)
    throw Error("exhaustive-not-schedulable", "use adversarial_bounds for exhaustive branching");
  if (opt.max_nodes == 0) throw Error("limit-zero", "max-nodes must be positive");

  Rst rst;
  rst.strategy = s;
  rst.start = start;
  rst.horizon = opt.max_depth;

  struct Pending {
    Term term;
    Rational p;
    std::size_t id;
    std::optional<std::size_t> parent;
  };
  std::vector<Pending> level{{start, Rational(1), 0, std::nullopt}};
  std::size_t created = 1;
  bool any_cut = false;

  for (std::size_t depth = 0; !level.empty(); ++depth) {
    rst.nf_mass.emplace_back(0);
    rst.open_mass.emplace_back(0);
    std::vector<Pending> next;
    std::unordered_map<Term, std::size_t> merged;
    for (Pending& v : level) {
      NodeKind kind;
      if (p.is_normal_form(v.term)) {
        kind = NodeKind::NormalForm;
        rst.nf_mass[depth] += v.p;
      } else {
        rst.open_mass[depth] += v.p;
        std::optional<Redex> r;
        if (depth < opt.max_depth && created < opt.max_nodes) {
          Scheduler sched(policy, policy.seed ^ detail::splitmix64(v.id));
          r = sched.pick(v.term, p, s);
        }
        MultiDistribution mu;
        if (r) mu = apply_redex(v.term, *r, p);
        if (r && created + mu.size() <= opt.max_nodes) {
          kind = NodeKind::Inner;
          for (Branch& b : mu) {
            Rational q = v.p * b.p;
            if (opt.merge) {
              auto [it, fresh] = merged.try_emplace(b.term, next.size());
              if (!fresh) {
                next[it->second].p += q;
                continue;
              }
            }
            next.push_back({b.term, q, created++, v.id});
          }
        } else {
          kind = NodeKind::Cut;
          any_cut = true;
          if (depth < opt.max_depth) {
            rst.node_limit_hit = true;
            rst.horizon = std::min(rst.horizon, depth);
          }
        }
      }
      if (opt.keep_nodes) rst.nodes.push_back({v.id, v.parent, v.p, v.term, depth, kind});
    }
    level = std::move(next);
  }
  rst.complete = !any_cut;
  if (opt.keep_nodes)
    std::sort(rst.nodes.begin(), rst.nodes.end(), [](const RstNode& a, const RstNode& b) { return a.id < b.id; });
  return rst;
}

inline Rst build_rst(const Ptrs& p, const Term& start, Strategy s, SchedulerPolicy policy, std::size_t max_depth,
                     std::size_t max_nodes, bool merge) {
  return build_rst(p, start, s, policy, ExploreOptions{max_depth, max_nodes, merge, true});
}

inline void check_depth(const Rst& r, std::size_t h) {
  if (!r.complete && h > r.horizon)
    throw Error("depth-exceeds-built", "depth " + std::to_string(h) + " beyond explored " + std::to_string(r.horizon));
}

inline Rational conv_prefix(const Rst& r, std::size_t h) {
  check_depth(r, h);
  Rational s = 0;
  for (std::size_t n = 0; n <= h && n < r.nf_mass.size(); ++n) s += r.nf_mass[n];
  return s;
}

// Node-sum form: mass of every non-NF node above depth h.
inline Rational edl_prefix(const Rst& r, std::size_t h) {
  check_depth(r, h);
  Rational s = 0;
  for (std::size_t n = 0; n < h && n < r.open_mass.size(); ++n) s += r.open_mass[n];
  return s;
}

// Level-sum form: sum over n < h of (1 - NF mass at or above depth n).
inline Rational edl_prefix_levels(const Rst& r, std::size_t h) {
  check_depth(r, h);
  Rational s = 0, conv = 0;
  for (std::size_t n = 0; n < h; ++n) {
    if (n < r.nf_mass.size()) conv += r.nf_mass[n];
    s += 1 - conv;
  }
  return s;
}

inline Rational edl_prefix_from_nodes(const Rst& r, std::size_t h) {
  Rational s = 0;
  for (const RstNode& v : r.nodes)
    if (v.depth < h && v.kind != NodeKind::NormalForm) s += v.p;
  return s;
}

struct Metrics {
  std::vector<Rational> conv;      // conv[H]
  std::vector<Rational> edl;       // edl[H]
  std::vector<Rational> frontier;  // non-NF mass at exactly depth H
};

inline Metrics metrics(const Rst& r) {
  Metrics m;
  Rational conv = 0, edl = 0;
  for (std::size_t n = 0; n <= r.horizon && n < r.nf_mass.size(); ++n) {
    conv += r.nf_mass[n];
    m.conv.push_back(conv);
    m.edl.push_back(edl);
    m.frontier.push_back(r.open_mass[n]);
    edl += r.open_mass[n];
  }
  return m;
}

// ---------------------------------------------------------------------------
// Exact step-count distribution for position-local deterministic schedulers.
// A term whose root can never be rewritten evolves its arguments
// independently and one after another, so its step count is the sum of the
// arguments' step counts.

class StepDistribution {
 public:
  StepDistribution(const Ptrs& p, Strategy s, SchedulerPolicy policy) : p_(p), s_(s), sched_(policy) {
    if (!policy.position_local())
      throw Error("unsupported-policy", "step distributions need a deterministic scheduler");
    split_ok_ = s != Strategy::SimultaneousInnermost;
  }

  // mass[k] = probability of reaching a normal form after exactly k steps, k <= budget.
  const std::vector<Rational>& of(const Term& t, std::size_t budget) {
    auto it = memo_.find(t);
    if (it != memo_.end() && it->second.size() > budget) return it->second;
    std::vector<Rational> d = compute(t, budget);
    auto& slot = memo_[t];
    slot = std::move(d);
    return slot;
  }

  std::size_t states() const { return memo_.size(); }

 private:
  std::vector<Rational> compute(const Term& t, std::size_t budget) {
    std::vector<Rational> out(budget + 1, Rational(0));
    if (p_.is_normal_form(t)) {
      out[0] = 1;
      return out;
    }
    if (budget == 0) return out;
    if (split_ok_ && !p_.is_defined(t.name())) {
      out[0] = 1;
      for (const Term& a : t.args()) {
        std::vector<Rational> da = of(a, budget);
        std::vector<Rational> conv(budget + 1, Rational(0));
        for (std::size_t i = 0; i <= budget; ++i) {
          if (out[i] == 0) continue;
          for (std::size_t j = 0; i + j <= budget; ++j)
            if (da[j] != 0) conv[i + j] += out[i] * da[j];
        }
        out = std::move(conv);
      }
      return out;
    }
    std::optional<Redex> r = sched_.pick(t, p_, s_);
    MultiDistribution mu = apply_redex(t, *r, p_);
    for (const Branch& b : mu) {
      std::vector<Rational> db = of(b.term, budget - 1);
      for (std::size_t k = 0; k + 1 <= budget; ++k)
        if (db[k] != 0) out[k + 1] += b.p * db[k];
    }
    return out;
  }

  const Ptrs& p_;
  Strategy s_;
  Scheduler sched_;
  bool split_ok_ = true;
  std::unordered_map<Term, std::vector<Rational>> memo_;
};

// conv_prefix and edl_prefix for every H <= depth, identical to the values of
// the tree build_rst would produce with the same scheduler.
inline Metrics exact_metrics(const Ptrs& p, const Term& start, Strategy s, SchedulerPolicy policy, std::size_t depth) {
  StepDistribution sd(p, s, policy);
  std::vector<Rational> d = sd.of(start, depth);
  Metrics m;
  Rational conv = 0, edl = 0;
  for (std::size_t n = 0; n <= depth; ++n) {
    conv += d[n];
    m.conv.push_back(conv);
    m.edl.push_back(edl);
    m.frontier.push_back(1 - conv);
    edl += 1 - conv;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Adversarial bounds over all redex choices

struct AdversarialResult {
  Rational min_conv;
  Rational max_edl;
  bool budget_exceeded = false;
  std::size_t states = 0;
};

class Adversary {
 public:
  Adversary(const Ptrs& p, Strategy s, std::size_t budget)
      : p_(p), s_(s), budget_(budget), fallback_(p, s == Strategy::SimultaneousInnermost ? Strategy::Innermost : s,
                                                 SchedulerPolicy::first()) {}

  struct Value {
    Rational conv, edl;
  };

  Value eval(const Term& t, std::size_t remaining) {
    if (p_.is_normal_form(t)) return {Rational(1), Rational(0)};
    if (remaining == 0) return {Rational(0), Rational(0)};
    Key key{t, remaining};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (memo_.size() >= budget_) {
      exceeded_ = true;
      return fallback(t, remaining);
    }
    Value best;
    bool first = true;
    for (const Redex& r : enumerate_redexes(t, p_, s_)) {
      MultiDistribution mu = apply_redex(t, r, p_);
      Value v{Rational(0), Rational(1)};
      for (const Branch& b : mu) {
        Value c = eval(b.term, remaining - 1);
        v.conv += b.p * c.conv;
        v.edl += b.p * c.edl;
      }
      if (first) {
        best = v;
        first = false;
      } else {
        if (v.conv < best.conv) best.conv = v.conv;
        if (v.edl > best.edl) best.edl = v.edl;
      }
    }
    memo_.emplace(key, best);
    return best;
  }

  bool exceeded() const { return exceeded_; }
  std::size_t states() const { return memo_.size(); }

 private:
  struct Key {
    Term t;
    std::size_t r;
    bool operator==(const Key& o) const { return t == o.t && r == o.r; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const { return detail::mix(k.t.hash(), k.r); }
  };

  // One fixed scheduler: an upper bound for the minimum and a lower bound for
  // the maximum.
  Value fallback(const Term& t, std::size_t remaining) {
    const std::vector<Rational>& d = fallback_.of(t, remaining);
    Value v{Rational(0), Rational(0)};
    for (std::size_t n = 0; n < remaining; ++n) {
      v.conv += d[n];
      v.edl += 1 - v.conv;
    }
    v.conv += d[remaining];
    return v;
  }

  const Ptrs& p_;
  Strategy s_;
  std::size_t budget_;
  StepDistribution fallback_;
  bool exceeded_ = false;
  std::unordered_map<Key, Value, KeyHash> memo_;
};

inline AdversarialResult adversarial_bounds(const Ptrs& p, const Term& start, Strategy s, std::size_t max_depth,
                                            std::size_t state_budget = 2'000'000) {
  Adversary adv(p, s, state_budget);
  auto v = adv.eval(start, max_depth);
  return {v.conv, v.edl, adv.exceeded(), adv.states()};
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct McEstimate {
  std::size_t samples = 0;
  std::size_t cap = 0;
  double terminated_fraction = 0;
  double mean_steps_terminated = 0;  // over runs that reached a normal form
  double mean_steps = 0;             // over all runs, steps truncated at cap
  double std_error = 0;              // of terminated_fraction
  double steps_std_error = 0;        // of mean_steps
  std::uint64_t seed = 0;
};

struct McRun {
  std::size_t steps = 0;
  bool terminated = false;
};

inline McRun mc_run(const Ptrs& p, const Term& start, Strategy s, SchedulerPolicy policy, std::size_t cap,
                    std::uint64_t seed, std::size_t index) {
  std::uint64_t stream = detail::splitmix64(seed ^ detail::splitmix64(index + 0x5bd1e995));
  Scheduler sched(policy, stream);
  std::mt19937_64 rng(detail::splitmix64(stream + 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Term t = start;
  McRun run;
  while (true) {
    std::optional<Redex> r = sched.pick(t, p, s);
    if (!r) {
      run.terminated = true;
      return run;
    }
    if (run.steps == cap) return run;
    MultiDistribution mu = apply_redex(t, *r, p);
    double u = unit(rng), acc = 0;
    std::size_t k = 0;
    for (; k + 1 < mu.size(); ++k) {
      acc += to_double(mu[k].p);
      if (u < acc) break;
    }
    t = mu[k].term;
    ++run.steps;
  }
}

inline McRun mc_run(ArenaSampler& arena, const Term& start, std::size_t cap, std::uint64_t seed, std::size_t index) {
  std::uint64_t stream = detail::splitmix64(seed ^ detail::splitmix64(index + 0x5bd1e995));
  std::mt19937_64 rng(detail::splitmix64(stream + 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  arena.reset(start);
  McRun run;
  while (true) {
    if (!arena.has_redex()) {
      run.terminated = true;
      return run;
    }
    if (run.steps == cap) return run;
    arena.step(unit(rng));
    ++run.steps;
  }
}

inline McEstimate monte_carlo(const Ptrs& p, const Term& start, Strategy s, SchedulerPolicy policy,
                              std::size_t samples, std::size_t cap, std::uint64_t seed, unsigned workers = 1) {
  if (samples == 0 || cap == 0) throw Error("usage-error", "samples and cap must be positive");
  if (policy.kind == SchedulerPolicy::ExhaustiveBranch)
    throw Error("exhaustive-not-schedulable", "Monte Carlo needs a single-path scheduler");
  std::vector<McRun> runs(samples);
  workers = std::max(1u, workers);
  auto work = [&](unsigned w) {
    if (ArenaSampler::supports(s, policy)) {
      ArenaSampler arena(p, s, policy);
      for (std::size_t i = w; i < samples; i += workers) runs[i] = mc_run(arena, start, cap, seed, i);
      return;
    }
    for (std::size_t i = w; i < samples; i += workers) runs[i] = mc_run(p, start, s, policy, cap, seed, i);
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  McEstimate e;
  e.samples = samples;
  e.cap = cap;
  e.seed = seed;
  double term = 0, steps_term = 0, steps = 0, steps_sq = 0;
  for (const McRun& r : runs) {
    if (r.terminated) {
      term += 1;
      steps_term += static_cast<double>(r.steps);
    }
    steps += static_cast<double>(r.steps);
    steps_sq += static_cast<double>(r.steps) * static_cast<double>(r.steps);
  }
  double n = static_cast<double>(samples);
  e.terminated_fraction = term / n;
  e.mean_steps_terminated = term > 0 ? steps_term / term : 0;
  e.mean_steps = steps / n;
  e.std_error = std::sqrt(e.terminated_fraction * (1 - e.terminated_fraction) / n);
  double var = std::max(0.0, steps_sq / n - e.mean_steps * e.mean_steps);
  e.steps_std_error = std::sqrt(var / n);
  return e;
}

// ---------------------------------------------------------------------------
// Export

inline std::string export_dot(const Rst& r) {
  std::ostringstream os;
  os << "digraph rst {\n  node [shape=box];\n";
  for (const RstNode& v : r.nodes) {
    os << "  n" << v.id << " [label=\"" << to_string(v.p) << " : " << v.term.str() << "\"";
    if (v.kind == NodeKind::NormalForm) os << ", style=bold";
    if (v.kind == NodeKind::Cut) os << ", style=dashed";
    os << "];\n";
  }
  for (const RstNode& v : r.nodes)
    if (v.parent) os << "  n" << *v.parent << " -> n" << v.id << ";\n";
  os << "}\n";
  return os.str();
}

inline nlohmann::json rst_to_json(const Rst& r) {
  nlohmann::json j;
  j["strategy"] = to_string(r.strategy);
  j["start"] = r.start.str();
  j["nodes"] = nlohmann::json::array();
  for (const RstNode& v : r.nodes) {
    nlohmann::json n;
    n["id"] = v.id;
    n["parent"] = v.parent ? nlohmann::json(*v.parent) : nlohmann::json(nullptr);
    n["p"] = to_string(v.p);
    n["term"] = v.term.str();
    n["depth"] = v.depth;
    n["kind"] = to_string(v.kind);
    j["nodes"].push_back(std::move(n));
  }
  return j;
}

inline std::string export_rst(const Rst& r, const std::string& format) {
  if (format == "dot") return export_dot(r);
  if (format == "json") return rst_to_json(r).dump(2) + "\n";
  throw Error("usage-error", "unknown export format '" + format + "'");
}

// Rebuilds the node list (and per-depth masses) from the JSON form.
inline Rst import_rst_json(const std::string& text, const std::set<std::string>& vars = {}) {
  nlohmann::json j = nlohmann::json::parse(text);
  Rst r;
  r.strategy = parse_strategy(j.at("strategy").get<std::string>());
  r.start = parse_term(j.at("start").get<std::string>(), vars);
  bool any_cut = false;
  for (const auto& n : j.at("nodes")) {
    RstNode v;
    v.id = n.at("id").get<std::size_t>();
    if (!n.at("parent").is_null()) v.parent = n.at("parent").get<std::size_t>();
    v.p = parse_rational(n.at("p").get<std::string>());
    v.term = parse_term(n.at("term").get<std::string>(), vars);
    v.depth = n.at("depth").get<std::size_t>();
    std::string k = n.at("kind").get<std::string>();
    v.kind = k == "nf" ? NodeKind::NormalForm : k == "cut" ? NodeKind::Cut : NodeKind::Inner;
    if (v.kind == NodeKind::Cut) any_cut = true;
    while (r.nf_mass.size() <= v.depth) {
      r.nf_mass.emplace_back(0);
      r.open_mass.emplace_back(0);
    }
    (v.kind == NodeKind::NormalForm ? r.nf_mass : r.open_mass)[v.depth] += v.p;
    r.horizon = std::max(r.horizon, v.depth);
    r.nodes.push_back(std::move(v));
  }
  r.complete = !any_cut;
  return r;
}

}  // namespace prost
