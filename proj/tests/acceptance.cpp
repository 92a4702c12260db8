#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

#include "prost/analyzer.hpp"
#include "support.hpp"

using namespace prost;
using testing::load;

namespace {

struct Verdict {
  bool ok = true;
  std::string detail;
};

void require(Verdict& v, bool cond, const std::string& what) {
  if (!cond) {
    v.ok = false;
    v.detail += (v.detail.empty() ? "" : "; ") + std::string("failed: ") + what;
  }
}

std::string fmt(double x, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Verdict edl_limit(const std::string& system, const std::string& start, std::size_t depth, double lo, double hi,
                  double budget) {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  Ptrs p = load(system);
  Rst r = build_rst(p, parse_term(start, p), Strategy::Innermost, SchedulerPolicy::first(), depth, 5'000'000, false);
  Rational e = edl_prefix(r, depth);
  bool monotone = true;
  for (std::size_t h = 1; h <= depth; ++h) monotone = monotone && edl_prefix(r, h) >= edl_prefix(r, h - 1);
  double secs = seconds_since(t0);
  require(v, r.horizon >= depth, "tree exact to the requested depth");
  require(v, to_double(e) >= lo && e <= Rational(hi), "edl_prefix in range");
  require(v, monotone, "monotone in depth");
  require(v, secs < budget, "runtime");
  v.detail = "edl_prefix(" + std::to_string(depth) + ") = " + to_string(e) + " ~ " + fmt(to_double(e), 9) + ", " +
             fmt(secs, 2) + " s" + (v.detail.empty() ? "" : "  " + v.detail);
  return v;
}

Verdict criterion1() { return edl_limit("p1", "g", 60, 6.95, 7, 5); }

Verdict criterion2() { return edl_limit("p2", "f(a,a)", 40, 4.99, 5, 5); }

Verdict criterion3() {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  Ptrs p = load("p1");
  Metrics m = exact_metrics(p, parse_term("g", p), Strategy::Full, SchedulerPolicy::first(), 40);
  double conv = to_double(m.conv.at(40));
  double secs = seconds_since(t0);
  require(v, conv <= 0.3434 && conv >= 0.30, "conv_prefix(40) in [0.30, 0.3434]");
  require(v, secs < 60, "runtime");
  std::string d = v.detail;
  v.detail = "outermost duplicate-eager conv_prefix(40) ~ " + fmt(conv, 10) + ", " + fmt(secs, 2) + " s" +
             (d.empty() ? "" : "  " + d);
  return v;
}

Verdict criterion4() {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  Ptrs p = load("p_rw");
  Term g = parse_term("g", p);
  double conv_end = 0;
  for (Strategy s : {Strategy::Full, Strategy::Innermost}) {
    Metrics m = exact_metrics(p, g, s, SchedulerPolicy::first(), 200);
    bool monotone = true;
    for (std::size_t h = 1; h < m.conv.size(); ++h) monotone = monotone && m.conv[h] >= m.conv[h - 1];
    require(v, monotone && m.conv.back() <= 1, std::string("conv_prefix monotone for ") + to_string(s));
    conv_end = to_double(m.conv.back());
  }
  McEstimate big = monte_carlo(p, g, Strategy::LeftmostInnermost, SchedulerPolicy::first(), 50'000, 10'000, 7);
  McEstimate at4k = monte_carlo(p, g, Strategy::LeftmostInnermost, SchedulerPolicy::first(), 50'000, 4'000, 7);
  McEstimate at1k = monte_carlo(p, g, Strategy::LeftmostInnermost, SchedulerPolicy::first(), 50'000, 1'000, 7);
  double secs = seconds_since(t0);
  require(v, big.terminated_fraction >= 0.95, "terminated fraction >= 0.95");
  require(v, at4k.mean_steps >= 1.1 * at1k.mean_steps, "capped mean grows by 10%");
  std::string d = v.detail;
  v.detail = "conv_prefix(200) ~ " + fmt(conv_end, 4) + ", terminated " + fmt(big.terminated_fraction, 5) + ", capped mean " + fmt(at1k.mean_steps, 3) +
             " (cap 1000) -> " + fmt(at4k.mean_steps, 3) + " (cap 4000), " + fmt(secs, 2) + " s" +
             (d.empty() ? "" : "  " + d);
  return v;
}

Verdict criterion5() {
  Verdict v;
  Ptrs p = load("p12"), p1 = load("p12_1"), p2 = load("p12_2");
  Term t = parse_term("f(g(a),g(a))", p);
  AdversarialResult adv = adversarial_bounds(p, t, Strategy::Innermost, 30);
  double h = to_double(adv.max_edl);
  require(v, h >= 7.9 && adv.max_edl <= 8, "maxEdl(30) in [7.9, 8]");
  AbstractionBound b = abstraction_bound(p1, p2, t, 30);
  require(v, b.k == 10, "|Abs_1| + |Abs_2| = 10");
  require(v, b.text.find("10 · 6 = 60") != std::string::npos, "bound text");
  std::string d = v.detail;
  v.detail = "maxEdl(30) ~ " + fmt(h, 6) + ", " + b.text.substr(0, b.text.find("  (")) + (d.empty() ? "" : "  " + d);
  return v;
}

std::multiset<std::string> canonical(const std::vector<Term>& ts) {
  std::multiset<std::string> out;
  for (const Term& t : ts) out.insert(canonical_renaming(t).str());
  return out;
}

Verdict criterion6() {
  Verdict v;
  Ptrs p1 = load("p12_1"), p2 = load("p12_2");
  Abstraction a = disjoint_abstraction(parse_term("f(g(a),g(a))", union_ptrs(p1, p2)), p1, p2);
  std::set<std::string> vars{"x", "y", "x'"};
  auto expect = [&](std::vector<std::string> xs) {
    std::vector<Term> ts;
    for (const auto& s : xs) ts.push_back(parse_term(s, vars));
    return canonical(ts);
  };
  require(v, canonical(a.abs1) == expect({"f(a,a)", "f(x,a)", "f(a,y)", "f(x,y)", "f(y,x)", "f(x,x)", "f(y,y)"}),
          "Abs_1");
  require(v, canonical(a.abs2) == expect({"x'", "g(x)", "g(y)"}), "Abs_2");
  std::string d = v.detail;
  v.detail = "|Abs_1| = " + std::to_string(a.abs1.size()) + ", |Abs_2| = " + std::to_string(a.abs2.size()) +
             (d.empty() ? "" : "  " + d);
  return v;
}

Verdict criterion7() {
  Verdict v;
  Ptrs p9 = load("p9");
  Variants var(p9);
  const Ptrs& g = var.generators().rules;
  std::set<std::string> got;
  for (const ProbRule& r : g.rules()) got.insert(render_rule(r));
  std::set<std::string> listing{"enc_g -> {1: g}",
                                "enc_f(x1) -> {1: f(argenc(x1))}",
                                "enc_s(x1) -> {1: s(argenc(x1))}",
                                "enc_0 -> {1: 0}",
                                "enc_c(x1,x2) -> {1: c(argenc(x1),argenc(x2))}",
                                "argenc(cons_g) -> {1: g}",
                                "argenc(cons_f(x1)) -> {1: f(argenc(x1))}",
                                "argenc(s(x1)) -> {1: s(argenc(x1))}",
                                "argenc(0) -> {1: 0}",
                                "argenc(c(x1,x2)) -> {1: c(argenc(x1),argenc(x2))}"};
  require(v, g.size() == 10 && got == listing, "generator listing");
  std::mt19937_64 rng(17);
  int ok = 0;
  for (int i = 0; i < 100; ++i) {
    Term t = testing::random_term(rng, p9.signature(), {}, 4);
    ok += var.dv(var.bv(t)) == t ? 1 : 0;
  }
  require(v, ok == 100, "dv(bv(t)) = t");
  std::string d = v.detail;
  v.detail = std::to_string(g.size()) + " generator rules, round-trip " + std::to_string(ok) + "/100" +
             (d.empty() ? "" : "  " + d);
  return v;
}

Verdict criterion8() {
  Verdict v;
  PropertyReport rd = check_properties(load("r_d"));
  PropertyReport r1 = check_properties(load("r1"));
  PropertyReport p4 = check_properties(load("p4"));
  PropertyReport p1 = check_properties(load("p1"));
  PropertyReport p2 = check_properties(load("p2"));
  PropertyReport p8 = check_properties(load("p8"));
  PropertyReport p9 = check_properties(load("p9"));
  require(v, rd.non_overlapping, "R_d NO");
  require(v, r1.overlay && r1.wcr == Tri::No, "R1 OS and not WCR-bounded(3)");
  require(v, p4.linear && p4.overlay && !p4.non_overlapping, "P4 linear, OS, not NO");
  require(v, p1.orthogonal && !p1.right_linear, "P1 OR, not RL");
  require(v, p2.right_linear && !p2.left_linear, "P2 RL, not LL");
  require(v, p8.spare.kind == SpareVerdict::Yes, "P8 SP");
  require(v, p9.spare.kind == SpareVerdict::Unknown, "P9 SP unknown");
  if (v.ok) v.detail = "R_d NO; R1 OS, WCR(3)=no; P4 linear OS not NO; P1 OR not RL; P2 RL not LL; P8 SP; P9 SP unknown";
  return v;
}

Verdict criterion9() {
  Verdict v;
  auto ids = [](const std::string& n) {
    Ptrs p = load(n);
    std::set<std::string> out;
    for (const Claim& c : applicable_theorems(check_properties(p), detect_infinite_splits(p), {})) out.insert(c.id);
    return out;
  };
  auto rw = ids("p_rw");
  for (const char* id : {"T1", "T2", "T3", "T4", "T5", "T7a", "T7b", "T7c"})
    require(v, rw.count(id) > 0, std::string("P_rw emits ") + id);
  auto p1 = ids("p1");
  require(v, !p1.count("T1") && p1.count("T3"), "P1 omits T1, emits T3");
  auto p2 = ids("p2");
  require(v, !p2.count("T1") && p2.count("T4"), "P2 omits T1, emits T4");
  auto prime = detect_infinite_splits(load("p_unary_prime"));
  require(v, prime && prime->kind == SplitWitness::NonErasingLoop && ids("p_unary_prime").count("T8"),
          "P_unary' loop witness gives T8");
  require(v, !detect_infinite_splits(load("p_unary")), "P_unary has no split");
  if (v.ok) v.detail = "P_rw T1-T5,T7; P1 no T1, T3; P2 no T1, T4; P_unary' T8 via loop; P_unary no split";
  return v;
}

Verdict criterion10() {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  std::size_t levels = 0, trees = 0;
  for (const std::string& n : testing::corpus_names()) {
    Ptrs p = load(n);
    for (const Term& t : testing::lhs_starts(p))
      for (Strategy s : {Strategy::Full, Strategy::Innermost, Strategy::LeftmostInnermost,
                         Strategy::SimultaneousInnermost}) {
        Rst plain = build_rst(p, t, s, SchedulerPolicy::first(), 12, 50'000, false);
        Rst merged = build_rst(p, t, s, SchedulerPolicy::first(), 12, 50'000, true);
        ++trees;
        for (const Rst* r : {&plain, &merged}) {
          Rational nf = 0;
          for (std::size_t d = 0; d < r->nf_mass.size() && d <= 12; ++d, ++levels) {
            nf += r->nf_mass[d];
            require(v, nf + r->open_mass[d] == 1, "conservation " + n + " " + t.str());
          }
          for (std::size_t h = 0; h <= r->horizon; ++h)
            require(v, edl_prefix(*r, h) == edl_prefix_levels(*r, h), "node-sum = level-sum " + n);
        }
        std::size_t h = std::min(plain.horizon, merged.horizon);
        for (std::size_t k = 0; k <= h; ++k) {
          require(v, conv_prefix(plain, k) == conv_prefix(merged, k), "merge invariance conv " + n);
          require(v, edl_prefix(plain, k) == edl_prefix(merged, k), "merge invariance edl " + n);
        }
      }
  }

  std::mt19937_64 rng(500);
  std::vector<Ptrs> systems;
  for (const std::string& n : testing::corpus_names()) {
    Ptrs p = load(n);
    if (!testing::lhs_starts(p).empty()) systems.push_back(std::move(p));
  }
  auto same = [](const Redex& a, const Redex& b) { return a.positions == b.positions && a.rule == b.rule; };
  auto within = [&](const std::vector<Redex>& small, const std::vector<Redex>& big) {
    return std::all_of(small.begin(), small.end(), [&](const Redex& r) {
      return std::any_of(big.begin(), big.end(), [&](const Redex& b) { return same(r, b); });
    });
  };
  for (int k = 0; k < 500; ++k) {
    const Ptrs& p = systems[static_cast<std::size_t>(k) % systems.size()];
    Term t = testing::random_term(rng, p.signature(), {}, 4);
    auto f = enumerate_redexes(t, p, Strategy::Full);
    auto i = enumerate_redexes(t, p, Strategy::Innermost);
    auto li = enumerate_redexes(t, p, Strategy::LeftmostInnermost);
    require(v, within(li, i) && within(i, f), "li within i within f on " + t.str());
  }

  std::mt19937_64 sys_rng(99);
  for (int k = 0; k < 200; ++k) {
    Ptrs p = testing::random_system(sys_rng);
    std::set<testing::Triple> got;
    for (const Overlap& o : critical_overlaps(p)) got.insert({o.outer, o.inner, o.position});
    require(v, got == testing::oracle_overlaps(p), "critical overlaps on\n" + render(p));
  }
  std::string d = v.detail;
  v.detail = std::to_string(trees) + " start terms x 4 strategies, " + std::to_string(levels) +
             " conserved levels, 500 redex inclusions, 200 overlap oracles, " + fmt(seconds_since(t0), 2) + " s" +
             (d.empty() ? "" : "  " + d);
  return v;
}

}  // namespace

int main() {
  std::vector<std::function<Verdict()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                 criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %zu: %s\n", v.ok ? "PASS" : "FAIL", i + 1, v.detail.c_str());
    std::fflush(stdout);
    failed += v.ok ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
