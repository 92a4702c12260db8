#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "prost/criteria.hpp"
#include "prost/explore.hpp"
#include "prost/transforms.hpp"

namespace prost {

struct PropRef {
  std::string property;  // AST, PAST, SAST, PSN, wPSN, SN, WN, edc, erc, dc, rc
  std::string strategy;  // f, i, li, sim, par
  std::string start;     // all, basic
};

struct Claim {
  std::string id;
  std::string relation;  // iff, implies, eq, le, note
  PropRef lhs, rhs;
  std::vector<std::string> instances;  // what PSN ranges over
  std::string cite;
  std::vector<std::string> prereqs;
  std::vector<std::string> assumed;
  std::string note;
};

struct ClaimOptions {
  bool assume_spare = false;
};

inline std::vector<Claim> applicable_theorems(const PropertyReport& r, const std::optional<SplitWitness>& split,
                                              const ClaimOptions& opt = {}) {
  std::vector<Claim> out;
  const std::vector<std::string> psn{"AST", "PAST", "SAST"};
  bool sp = r.spare.kind == SpareVerdict::Yes;
  bool sp_assumed = !sp && opt.assume_spare;
  auto emit = [&](std::string id, std::string rel, PropRef l, PropRef rr, std::string cite,
                  std::vector<std::string> pre, bool uses_sp = false, std::vector<std::string> inst = {}) {
    Claim c{std::move(id), std::move(rel), std::move(l), std::move(rr), std::move(inst), std::move(cite),
            std::move(pre), {}, {}};
    if (uses_sp && sp_assumed) c.assumed.push_back("SP");
    out.push_back(std::move(c));
  };
  bool NO = r.non_overlapping, LL = r.left_linear, RL = r.right_linear, NE = r.non_erasing;
  bool SP = sp || sp_assumed;

  if (NO && LL && RL)
    emit("T1", "iff", {"PSN", "f", "all"}, {"PSN", "i", "all"}, "innermost and full coincide on orthogonal right-linear systems",
         {"NO", "LL", "RL"}, false, psn);
  if (NO && LL && RL && NE)
    emit("T2", "iff", {"PSN", "f", "all"}, {"wPSN", "f", "all"},
         "weak and strong variants coincide on non-overlapping linear non-erasing systems", {"NO", "LL", "RL", "NE"},
         false, psn);
  if (NO)
    emit("T3", "iff", {"PSN", "i", "all"}, {"PSN", "li", "all"},
         "leftmost-innermost and innermost coincide on non-overlapping systems", {"NO"}, false, psn);
  if (NO && RL)
    emit("T4", "implies", {"PSN", "sim", "all"}, {"PSN", "f", "all"},
         "simultaneous innermost bounds full rewriting on non-overlapping right-linear systems", {"NO", "RL"}, false,
         psn);
  if (NO && LL && SP)
    emit("T5", "iff", {"PSN", "f", "basic"}, {"PSN", "i", "basic"},
         "innermost and full coincide from basic terms on orthogonal spare systems", {"OR", "SP"}, true, psn);
  if (NO && SP) {
    emit("T6", "implies", {"PSN", "sim", "basic"}, {"PSN", "f", "basic"},
         "simultaneous innermost bounds full rewriting from basic terms on non-overlapping spare systems", {"NO", "SP"},
         true, psn);
    emit("T6", "le", {"erc", "f", "basic"}, {"erc", "sim", "basic"},
         "simultaneous innermost bounds full rewriting from basic terms on non-overlapping spare systems", {"NO", "SP"},
         true);
  }
  if (NO && LL && RL) {
    const char* cite = "expected complexity is the same for innermost and full on orthogonal right-linear systems";
    emit("T7a", "eq", {"edc", "f", "all"}, {"edc", "i", "all"}, cite, {"NO", "LL", "RL"});
    emit("T7a", "eq", {"erc", "f", "basic"}, {"erc", "i", "basic"}, cite, {"NO", "LL", "RL"});
  }
  if (NO) {
    const char* cite = "expected complexity is the same for leftmost-innermost and innermost on non-overlapping systems";
    emit("T7b", "eq", {"edc", "li", "all"}, {"edc", "i", "all"}, cite, {"NO"});
    emit("T7b", "eq", {"erc", "li", "basic"}, {"erc", "i", "basic"}, cite, {"NO"});
  }
  if (NO && RL) {
    const char* cite = "simultaneous innermost complexity bounds full complexity on non-overlapping right-linear systems";
    emit("T7c", "le", {"edc", "f", "all"}, {"edc", "sim", "all"}, cite, {"NO", "RL"});
    emit("T7c", "le", {"erc", "f", "basic"}, {"erc", "sim", "basic"}, cite, {"NO", "RL"});
  }
  if (split) {
    bool loop = split->kind == SplitWitness::NonErasingLoop;
    emit("T8", "iff", {"PAST", "f", "all"}, {"SAST", "f", "all"},
         loop ? "PAST and SAST coincide when a non-erasing loop yields infinite splits"
              : "PAST and SAST coincide for finite systems with a symbol of arity at least two",
         {loop ? "split-witness:non-erasing-loop" : "split-witness:arity2-finite"});
  }
  if (r.trivial) {
    bool OS = r.overlay, OR = r.orthogonal;
    bool wcr = r.wcr && *r.wcr == Tri::Yes;
    if (OR)
      emit("T9", "iff", {"SN", "f", "all"}, {"SN", "i", "all"}, "classical: innermost termination suffices for orthogonal systems",
           {"OR"});
    if (NO)
      emit("T9", "iff", {"SN", "f", "all"}, {"SN", "i", "all"},
           "classical: innermost termination suffices for non-overlapping systems", {"NO"});
    if (OS && wcr)
      emit("T9", "iff", {"SN", "f", "all"}, {"SN", "i", "all"},
           "classical: innermost termination suffices for locally confluent overlay systems",
           {"OS", "WCR-bounded(" + std::to_string(r.wcr_depth) + ")"});
    if (NO && NE)
      emit("T9", "iff", {"SN", "f", "all"}, {"WN", "f", "all"},
           "classical: weak and strong normalization coincide on non-overlapping non-erasing systems", {"NO", "NE"});
    emit("T9", "iff", {"SN", "i", "all"}, {"SN", "li", "all"},
         "classical: innermost and leftmost-innermost termination coincide", {});
    if (OS && SP)
      emit("T9", "eq", {"rc", "f", "basic"}, {"rc", "i", "basic"},
           "classical: runtime complexity is the same for innermost and full on spare overlay systems", {"OS", "SP"},
           true);
    if (NO && LL && RL)
      emit("T9", "eq", {"dc", "f", "all"}, {"dc", "i", "all"},
           "classical: derivational complexity is the same for innermost and full on orthogonal right-linear systems",
           {"NO", "linear"});
    if (NO) {
      const char* cite = "classical: complexity is the same for leftmost-innermost and innermost on non-overlapping systems";
      emit("T9", "eq", {"dc", "li", "all"}, {"dc", "i", "all"}, cite, {"NO"});
      emit("T9", "eq", {"rc", "li", "basic"}, {"rc", "i", "basic"}, cite, {"NO"});
    }
    if (NO && RL) {
      const char* cite = "classical: parallel innermost and full complexity coincide on non-overlapping right-linear systems";
      emit("T9", "eq", {"dc", "f", "all"}, {"dc", "par", "all"}, cite, {"NO", "RL"});
      emit("T9", "eq", {"rc", "f", "basic"}, {"rc", "par", "basic"}, cite, {"NO", "RL"});
    }
  }
  Claim past{"T10", "note", {"PAST", "f", "all"}, {"PAST", "f", "all"}, {}, "signature extensions",
             {}, {}, "PAST is not preserved when the signature is extended"};
  Claim others{"T10", "note", {"AST", "f", "all"}, {"SAST", "f", "all"}, {"AST", "SAST"}, "signature extensions",
               {}, {}, "AST and SAST are preserved when the signature is extended"};
  out.push_back(std::move(past));
  out.push_back(std::move(others));
  return out;
}

inline std::string to_string(const PropRef& p) {
  return p.property + "(" + p.strategy + (p.start == "basic" ? ", basic" : "") + ")";
}

inline std::string to_string(const Claim& c) {
  if (c.relation == "note") return c.id + "  note: " + c.note;
  static const std::map<std::string, std::string> sym{
      {"iff", "<=>"}, {"implies", "=>"}, {"eq", "="}, {"le", "<="}};
  std::string s = c.id + "  " + to_string(c.lhs) + " " + sym.at(c.relation) + " " + to_string(c.rhs);
  if (!c.instances.empty()) {
    s += "   [PSN in";
    for (const std::string& i : c.instances) s += " " + i;
    s += "]";
  }
  s += "   {";
  for (std::size_t i = 0; i < c.prereqs.size(); ++i) s += (i ? ", " : "") + c.prereqs[i];
  s += "}";
  if (!c.assumed.empty()) {
    s += " assuming";
    for (const std::string& a : c.assumed) s += " " + a;
  }
  return s + "  -- " + c.cite;
}

// ---------------------------------------------------------------------------
// Decomposition

enum class DecompositionKind { Disjoint, SharedConstructor };

inline const char* to_string(DecompositionKind k) {
  return k == DecompositionKind::Disjoint ? "disjoint" : "shared-constructor";
}

struct ModularityClaim {
  std::string property;  // e.g. AST(i)
  std::string cite;
  bool modular = true;   // false marks an explicit non-modularity warning
};

struct Decomposition {
  DecompositionKind kind = DecompositionKind::Disjoint;
  std::vector<std::vector<std::size_t>> components;
  std::vector<ModularityClaim> theorems;
};

namespace detail {

inline void symbols_in(const Term& t, std::set<std::string>& out) {
  if (t.is_var()) return;
  out.insert(t.name());
  for (const Term& a : t.args()) symbols_in(a, out);
}

inline std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

}  // namespace detail

inline Decomposition decompose(const Ptrs& p, DecompositionKind kind, const PropertyReport* props = nullptr) {
  Decomposition d;
  d.kind = kind;
  std::size_t n = p.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  std::map<std::string, std::size_t> owner;
  for (const ProbRule& r : p.rules()) {
    std::set<std::string> syms;
    detail::symbols_in(r.lhs, syms);
    for (const Branch& b : r.rhs) detail::symbols_in(b.term, syms);
    for (const std::string& f : syms) {
      if (kind == DecompositionKind::SharedConstructor && !p.is_defined(f)) continue;
      auto [it, fresh] = owner.emplace(f, r.index);
      if (!fresh) parent[detail::find_root(parent, r.index)] = detail::find_root(parent, it->second);
    }
  }
  std::map<std::size_t, std::size_t> slot;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t root = detail::find_root(parent, i);
    auto [it, fresh] = slot.emplace(root, d.components.size());
    if (fresh) d.components.emplace_back();
    d.components[it->second].push_back(i);
  }
  PropertyReport local;
  if (!props) {
    local = check_properties(p);
    props = &local;
  }
  bool no_linear = props->non_overlapping && props->linear;
  if (kind == DecompositionKind::Disjoint) {
    d.theorems.push_back({"AST(i)", "innermost AST is modular for disjoint unions", true});
    d.theorems.push_back({"SAST(i)", "innermost SAST is modular for disjoint unions", true});
    if (no_linear) {
      d.theorems.push_back({"AST(f)", "full AST is modular for disjoint non-overlapping linear unions", true});
      d.theorems.push_back({"SAST(f)", "full SAST is modular for disjoint non-overlapping linear unions", true});
    }
    d.theorems.push_back({"PAST(i)", "innermost PAST is not modular for disjoint unions", false});
  } else {
    d.theorems.push_back({"AST(i)", "innermost AST is modular for shared-constructor unions", true});
    if (no_linear)
      d.theorems.push_back({"AST(f)", "full AST is modular for shared-constructor non-overlapping linear unions", true});
    d.theorems.push_back({"PAST(i)", "innermost PAST is not modular for shared-constructor unions", false});
    d.theorems.push_back({"SAST(i)", "innermost SAST is not modular for shared-constructor unions", false});
  }
  return d;
}

// ---------------------------------------------------------------------------
// Abstraction-based bound on the expected derivation height of a start term
// over a disjoint union of two components.

struct AbstractionBound {
  Abstraction abstraction;
  std::size_t k = 0;              // |Abs_1| + |Abs_2|
  Rational c_max_lower;           // best lower bound on the largest height found
  Term c_max_term;
  int component_of_max = 0;
  std::size_t c_max_display = 0;  // integer used in the bound
  bool budget_exceeded = false;
  std::string text;
};

inline AbstractionBound abstraction_bound(const Ptrs& p1, const Ptrs& p2, const Term& t, std::size_t depth,
                                          std::size_t state_budget = 2'000'000) {
  AbstractionBound b;
  b.abstraction = disjoint_abstraction(t, p1, p2);
  b.k = b.abstraction.abs1.size() + b.abstraction.abs2.size();
  bool first = true;
  auto scan = [&](const std::vector<Term>& qs, const Ptrs& sys, int comp) {
    for (const Term& q : qs) {
      auto r = adversarial_bounds(sys, q, Strategy::Innermost, depth, state_budget);
      b.budget_exceeded = b.budget_exceeded || r.budget_exceeded;
      if (first || r.max_edl > b.c_max_lower) {
        b.c_max_lower = r.max_edl;
        b.c_max_term = q;
        b.component_of_max = comp;
        first = false;
      }
    }
  };
  scan(b.abstraction.abs1, p1, 1);
  scan(b.abstraction.abs2, p2, 2);
  double hundredths = std::round(to_double(b.c_max_lower) * 100.0) / 100.0;
  b.c_max_display = static_cast<std::size_t>(std::ceil(hundredths));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", to_double(b.c_max_lower));
  b.text = "K · C_max = " + std::to_string(b.k) + " · " + std::to_string(b.c_max_display) + " = " +
           std::to_string(b.k * b.c_max_display) + "  (K = |Abs_1| + |Abs_2| = " +
           std::to_string(b.abstraction.abs1.size()) + " + " + std::to_string(b.abstraction.abs2.size()) +
           "; C_max from " + (b.c_max_term.is_null() ? std::string("-") : b.c_max_term.str()) +
           ", innermost height lower bound " + buf + " at depth " + std::to_string(depth) + ")";
  return b;
}

// ---------------------------------------------------------------------------
// Report

struct AnalyzeOptions {
  CheckOptions check;
  ClaimOptions claims;
  struct Simulation {
    Term start;
    Strategy strategy = Strategy::Innermost;
    SchedulerPolicy policy;
    std::size_t depth = 20;
    std::size_t max_nodes = 1'000'000;
    bool merge = true;
  };
  std::vector<Simulation> simulations;
};

struct AnalysisReport {
  std::string digest;
  std::size_t rules = 0;
  std::vector<Symbol> defined, constructors;
  PropertyReport properties;
  std::optional<SplitWitness> split;
  std::string split_text;
  std::vector<Claim> claims;
  Decomposition disjoint, shared;
  std::vector<nlohmann::json> evidence;
  std::vector<std::string> assumptions;
};

inline std::string digest_of(const Ptrs& p) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : render(p)) h = (h ^ c) * 1099511628211ULL;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline nlohmann::json simulate_evidence(const Ptrs& p, const AnalyzeOptions::Simulation& s) {
  nlohmann::json e;
  e["start"] = s.start.str();
  e["strategy"] = to_string(s.strategy);
  e["scheduler"] = to_string(s.policy.kind);
  e["depth"] = s.depth;
  if (s.policy.kind == SchedulerPolicy::ExhaustiveBranch) {
    auto r = adversarial_bounds(p, s.start, s.strategy, s.depth, s.max_nodes);
    e["kind"] = "adversarial";
    e["min_conv"] = to_string(r.min_conv);
    e["min_conv_approx"] = to_double(r.min_conv);
    e["max_edl"] = to_string(r.max_edl);
    e["max_edl_approx"] = to_double(r.max_edl);
    e["budget_exceeded"] = r.budget_exceeded;
    e["states"] = r.states;
    return e;
  }
  Rst rst = build_rst(p, s.start, s.strategy, s.policy, ExploreOptions{s.depth, s.max_nodes, s.merge, false});
  std::size_t h = rst.complete ? s.depth : rst.horizon;
  e["kind"] = "rst";
  e["merge"] = s.merge;
  e["max_nodes"] = s.max_nodes;
  e["horizon"] = h;
  e["conv_prefix"] = to_string(conv_prefix(rst, h));
  e["conv_prefix_approx"] = to_double(conv_prefix(rst, h));
  e["edl_prefix"] = to_string(edl_prefix(rst, h));
  e["edl_prefix_approx"] = to_double(edl_prefix(rst, h));
  e["node_limit_hit"] = rst.node_limit_hit;
  return e;
}

inline AnalysisReport analyze(const Ptrs& p, const AnalyzeOptions& opt = {}) {
  AnalysisReport a;
  a.digest = digest_of(p);
  a.rules = p.size();
  a.defined = p.defined();
  a.constructors = p.constructors();
  a.properties = check_properties(p, opt.check);
  a.split = detect_infinite_splits(p);
  if (a.split) a.split_text = describe(*a.split, p);
  a.claims = applicable_theorems(a.properties, a.split, opt.claims);
  a.disjoint = decompose(p, DecompositionKind::Disjoint, &a.properties);
  a.shared = decompose(p, DecompositionKind::SharedConstructor, &a.properties);
  if (opt.claims.assume_spare && a.properties.spare.kind != SpareVerdict::Yes) a.assumptions.push_back("SP");
  for (const auto& s : opt.simulations) a.evidence.push_back(simulate_evidence(p, s));
  return a;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const PropRef& r) {
  return {{"property", r.property}, {"strategy", r.strategy}, {"start", r.start}};
}

inline nlohmann::json to_json(const Claim& c) {
  return {{"id", c.id},     {"relation", c.relation}, {"lhs", to_json(c.lhs)}, {"rhs", to_json(c.rhs)},
          {"instances", c.instances}, {"cite", c.cite}, {"prereqs", c.prereqs}, {"assumed", c.assumed},
          {"note", c.note}};
}

inline nlohmann::json to_json(const std::vector<Symbol>& syms) {
  nlohmann::json j = nlohmann::json::array();
  for (const Symbol& s : syms) j.push_back({{"name", s.name}, {"arity", s.arity}});
  return j;
}

inline nlohmann::json to_json(const PropertyReport& r) {
  nlohmann::json ov = nlohmann::json::array();
  for (const Overlap& o : r.overlaps)
    ov.push_back({{"outer_rule", o.outer + 1},
                  {"inner_rule", o.inner + 1},
                  {"position", to_string(o.position)},
                  {"root", o.at_root()},
                  {"unifier", to_string(o.unifier)}});
  nlohmann::json j{{"LL", r.left_linear},   {"RL", r.right_linear}, {"linear", r.linear},
                   {"NE", r.non_erasing},   {"NO", r.non_overlapping}, {"OS", r.overlay},
                   {"OR", r.orthogonal},    {"trivial_probabilities", r.trivial},
                   {"SP", {{"verdict", to_string(r.spare.kind)}, {"justification", r.spare.justification}}},
                   {"overlaps", ov},        {"duplicating", to_json(r.duplicating)}};
  if (r.wcr)
    j["WCR_bounded"] = {{"verdict", to_string(*r.wcr)}, {"depth", r.wcr_depth}};
  else
    j["WCR_bounded"] = nullptr;
  return j;
}

inline nlohmann::json to_json(const Decomposition& d) {
  nlohmann::json th = nlohmann::json::array();
  for (const auto& t : d.theorems) th.push_back({{"property", t.property}, {"modular", t.modular}, {"cite", t.cite}});
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : d.components) {
    nlohmann::json one = nlohmann::json::array();
    for (std::size_t i : c) one.push_back(i + 1);
    comps.push_back(one);
  }
  return {{"kind", to_string(d.kind)}, {"components", comps}, {"theorems", th}};
}

inline nlohmann::json to_json(const AnalysisReport& a) {
  nlohmann::json claims = nlohmann::json::array();
  for (const Claim& c : a.claims) claims.push_back(to_json(c));
  nlohmann::json split = nullptr;
  if (a.split)
    split = {{"kind", a.split->kind == SplitWitness::Arity2Finite ? "arity2-finite" : "non-erasing-loop"},
             {"text", a.split_text}};
  return {{"input", {{"digest", a.digest}, {"rules", a.rules}, {"defined", to_json(a.defined)},
                     {"constructors", to_json(a.constructors)}}},
          {"properties", to_json(a.properties)},
          {"splits", split},
          {"claims", claims},
          {"decomposition", {{"disjoint", to_json(a.disjoint)}, {"shared_constructor", to_json(a.shared)}}},
          {"evidence", a.evidence},
          {"assumptions", a.assumptions}};
}

}  // namespace prost
