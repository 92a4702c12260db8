#include <catch_amalgamated.hpp>

#include <random>

#include "prost/explore.hpp"
#include "support.hpp"

using namespace prost;

namespace {

Rst tree(const Ptrs& p, const std::string& start, Strategy s, std::size_t depth, bool merge = false,
         std::size_t max_nodes = 1'000'000) {
  return build_rst(p, parse_term(start, p), s, SchedulerPolicy::first(), depth, max_nodes, merge);
}

Ptrs random_probabilistic_system(std::mt19937_64& rng) {
  std::vector<Symbol> sig{{"a", 0}, {"b", 0}, {"s", 1}, {"f", 2}};
  std::vector<ProbRule> rules;
  std::size_t n = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  while (rules.size() < n) {
    Term l = testing::random_term(rng, sig, {"x", "y"}, 2);
    if (l.is_var()) continue;
    std::vector<std::string> vs = variables(l);
    MultiDistribution mu;
    for (int k = 0; k < 2; ++k) mu.push_back({Rational(1, 2), testing::random_term(rng, sig, vs, 2)});
    rules.push_back({l, std::move(mu), 0});
  }
  return Ptrs(std::move(rules), {"x", "y"});
}

}  // namespace

TEST_CASE("random walk tree shape") {
  Ptrs rw = testing::load("p_rw");
  Rst r = tree(rw, "g", Strategy::Full, 3);
  REQUIRE(r.nodes.size() >= 3);
  CHECK(r.nodes[0].term == parse_term("g", rw));
  CHECK(r.nodes[1].term == parse_term("c(g,g)", rw));
  CHECK(r.nodes[2].term == parse_term("0", rw));
  CHECK(r.nodes[2].kind == NodeKind::NormalForm);
  CHECK(r.nodes[2].p == Rational(1, 2));
  CHECK(conv_prefix(r, 3) == Rational(5, 8));
  CHECK(conv_prefix(r, 0) == 0);
}

TEST_CASE("innermost tree of the doubling system") {
  Ptrs p1 = testing::load("p1");
  Rst r = tree(p1, "g", Strategy::Innermost, 2);
  std::map<std::pair<std::size_t, std::string>, Rational> seen;
  for (const RstNode& v : r.nodes) seen[{v.depth, v.term.str()}] += v.p;
  CHECK(seen.at({1, "d(g)"}) == Rational(3, 4));
  CHECK(seen.at({1, "0"}) == Rational(1, 4));
  CHECK(seen.at({2, "d(d(g))"}) == Rational(9, 16));
  CHECK(seen.at({2, "d(0)"}) == Rational(3, 16));
  CHECK(conv_prefix(r, 2) == Rational(1, 4));
}

TEST_CASE("normal-form start") {
  Ptrs rw = testing::load("p_rw");
  Rst r = tree(rw, "0", Strategy::Full, 5);
  CHECK(r.nodes.size() == 1);
  CHECK(conv_prefix(r, 0) == 1);
  CHECK(edl_prefix(r, 5) == 0);
  CHECK(r.complete);
}

TEST_CASE("expected derivation lengths approach their limits") {
  Ptrs p2 = testing::load("p2");
  Rst r2 = tree(p2, "f(a,a)", Strategy::Innermost, 30, true);
  Rational e2 = edl_prefix(r2, 30);
  CHECK(to_double(e2) > 4.99);
  CHECK(e2 < 5);

  Ptrs p1 = testing::load("p1");
  Rst r1 = tree(p1, "g", Strategy::Innermost, 40, true);
  Rational prev = 0;
  for (std::size_t h = 0; h <= 40; h += 5) {
    Rational e = edl_prefix(r1, h);
    CHECK(e >= prev);
    prev = e;
  }
  CHECK(to_double(prev) > 6.9);
  CHECK(prev < 7);
}

TEST_CASE("node sums equal level sums") {
  for (const std::string& n : testing::corpus_names()) {
    Ptrs p = testing::load(n);
    for (const Term& t : testing::lhs_starts(p)) {
      for (Strategy s : {Strategy::Full, Strategy::Innermost}) {
        Rst r = build_rst(p, t, s, SchedulerPolicy::first(), 10, 20'000, false);
        INFO(n << " " << t.str());
        for (std::size_t h = 0; h <= r.horizon; ++h) {
          CHECK(edl_prefix(r, h) == edl_prefix_levels(r, h));
          CHECK(edl_prefix(r, h) == edl_prefix_from_nodes(r, h));
        }
      }
    }
  }
}

TEST_CASE("probability is conserved at every level") {
  for (const std::string& n : testing::corpus_names()) {
    Ptrs p = testing::load(n);
    for (const Term& t : testing::lhs_starts(p)) {
      for (Strategy s : {Strategy::Full, Strategy::Innermost, Strategy::LeftmostInnermost,
                         Strategy::SimultaneousInnermost}) {
        Rst r = build_rst(p, t, s, SchedulerPolicy::first(), 12, 50'000, true);
        INFO(n << " " << t.str() << " " << to_string(s));
        Rational nf = 0;
        for (std::size_t d = 0; d < r.nf_mass.size() && d <= 12; ++d) {
          nf += r.nf_mass[d];
          CHECK(nf + r.open_mass[d] == 1);
        }
      }
    }
  }
}

TEST_CASE("merging equal terms leaves both metrics unchanged") {
  for (const std::string& n : testing::corpus_names()) {
    Ptrs p = testing::load(n);
    for (const Term& t : testing::lhs_starts(p)) {
      Rst plain = build_rst(p, t, Strategy::Innermost, SchedulerPolicy::first(), 9, 40'000, false);
      Rst merged = build_rst(p, t, Strategy::Innermost, SchedulerPolicy::first(), 9, 40'000, true);
      std::size_t h = std::min(plain.horizon, merged.horizon);
      INFO(n << " " << t.str());
      for (std::size_t k = 0; k <= h; ++k) {
        CHECK(conv_prefix(plain, k) == conv_prefix(merged, k));
        CHECK(edl_prefix(plain, k) == edl_prefix(merged, k));
      }
    }
  }
}

TEST_CASE("exact step distribution matches the explicit tree") {
  for (const std::string& n : testing::corpus_names()) {
    Ptrs p = testing::load(n);
    for (const Term& t : testing::lhs_starts(p)) {
      for (Strategy s : {Strategy::Full, Strategy::Innermost, Strategy::LeftmostInnermost}) {
        for (SchedulerPolicy pol : {SchedulerPolicy::first(), SchedulerPolicy::rightmost()}) {
          Rst r = build_rst(p, t, s, pol, 8, 100'000, true);
          if (!r.complete && r.node_limit_hit) continue;
          Metrics a = metrics(r);
          Metrics b = exact_metrics(p, t, s, pol, 8);
          INFO(n << " " << t.str() << " " << to_string(s) << " " << to_string(pol.kind));
          for (std::size_t h = 0; h <= 8 && h < a.conv.size() && h < b.conv.size(); ++h) {
            CHECK(a.conv[h] == b.conv[h]);
            CHECK(a.edl[h] == b.edl[h]);
          }
        }
      }
    }
  }
}

TEST_CASE("duplicate-eager full rewriting stays near the extinction probability") {
  // Smallest fixpoint of q = 1/4 + 3/4 q^2, by iteration from 0.
  double q = 0;
  for (int i = 0; i < 100000; ++i) q = 0.25 + 0.75 * q * q;
  CHECK(q == Catch::Approx(1.0 / 3).epsilon(1e-3));

  Ptrs p1 = testing::load("p1");
  Metrics m = exact_metrics(p1, parse_term("g", p1), Strategy::Full, SchedulerPolicy::first(), 24);
  for (std::size_t h = 1; h < m.conv.size(); ++h) {
    CHECK(m.conv[h] >= m.conv[h - 1]);
    CHECK(to_double(m.conv[h]) <= q + 1e-9);
  }
  CHECK(to_double(m.conv.back()) > 0.3);

  AdversarialResult adv = adversarial_bounds(p1, parse_term("g", p1), Strategy::Full, 7);
  CHECK_FALSE(adv.budget_exceeded);
  CHECK(adv.min_conv <= m.conv[7]);
}

TEST_CASE("adversarial bounds on a deterministic system equal the unique tree") {
  Ptrs rd = testing::load("r_d");
  Term t = parse_term("d(s(s(0)))", rd);
  Rst r = build_rst(rd, t, Strategy::Innermost, SchedulerPolicy::first(), 10, 1000, false);
  AdversarialResult adv = adversarial_bounds(rd, t, Strategy::Innermost, 10);
  CHECK(adv.min_conv == conv_prefix(r, 10));
  CHECK(adv.max_edl == edl_prefix(r, 10));
}

TEST_CASE("adversarial height of the mixed disjoint term") {
  Ptrs p12 = testing::load("p12");
  AdversarialResult adv = adversarial_bounds(p12, parse_term("f(g(a),g(a))", p12), Strategy::Innermost, 30);
  CHECK(to_double(adv.max_edl) >= 7.9);
  CHECK(adv.max_edl <= 8);
}

TEST_CASE("Monte Carlo estimates") {
  Ptrs rw = testing::load("p_rw");
  McEstimate nf = monte_carlo(rw, parse_term("0", rw), Strategy::Innermost, SchedulerPolicy::first(), 100, 10, 1);
  CHECK(nf.terminated_fraction == 1);
  CHECK(nf.mean_steps == 0);

  Ptrs p12 = testing::load("p12");
  McEstimate e = monte_carlo(p12, parse_term("f(g(a),g(a))", p12), Strategy::Innermost, SchedulerPolicy::first(),
                             20000, 500, 3);
  CHECK(e.mean_steps == Catch::Approx(8).margin(0.15));

  McEstimate one = monte_carlo(rw, parse_term("g", rw), Strategy::LeftmostInnermost, SchedulerPolicy::first(), 400,
                               200, 9, 1);
  McEstimate four = monte_carlo(rw, parse_term("g", rw), Strategy::LeftmostInnermost, SchedulerPolicy::first(), 400,
                                200, 9, 4);
  CHECK(one.terminated_fraction == four.terminated_fraction);
  CHECK(one.mean_steps == four.mean_steps);
  CHECK_THROWS_AS(monte_carlo(rw, parse_term("g", rw), Strategy::Full, SchedulerPolicy::exhaustive(), 10, 10, 1),
                  Error);
}

TEST_CASE("arena sampler follows the term-based path exactly") {
  std::mt19937_64 rng(77);
  int runs = 0;
  for (int k = 0; k < 150; ++k) {
    Ptrs p = random_probabilistic_system(rng);
    for (Strategy s : {Strategy::Full, Strategy::Innermost, Strategy::LeftmostInnermost}) {
      for (SchedulerPolicy pol : {SchedulerPolicy::first(), SchedulerPolicy::rightmost()}) {
        Term start = testing::random_term(rng, {{"a", 0}, {"b", 0}, {"s", 1}, {"f", 2}}, {}, 3);
        ArenaSampler arena(p, s, pol);
        arena.reset(start);
        Scheduler sched(pol);
        Term t = start;
        INFO(render(p) << "start " << start.str() << " " << to_string(s) << " " << to_string(pol.kind));
        for (int step = 0; step < 30; ++step) {
          double u = std::uniform_real_distribution<double>(0, 1)(rng);
          auto r = sched.pick(t, p, s);
          REQUIRE(r.has_value() == arena.has_redex());
          if (!r) break;
          MultiDistribution mu = apply_redex(t, *r, p);
          double acc = 0;
          std::size_t b = 0;
          for (; b + 1 < mu.size(); ++b) {
            acc += to_double(mu[b].p);
            if (u < acc) break;
          }
          t = mu[b].term;
          REQUIRE(arena.step(u));
          REQUIRE(arena.term() == t);
        }
        for (std::size_t i = 0; i < 3; ++i) {
          McRun x = mc_run(p, start, s, pol, 50, 5, i);
          McRun y = mc_run(arena, start, 50, 5, i);
          CHECK(x.steps == y.steps);
          CHECK(x.terminated == y.terminated);
        }
        ++runs;
      }
    }
  }
  CHECK(runs == 900);
}

TEST_CASE("tree export") {
  Ptrs rw = testing::load("p_rw");
  Rst single = tree(rw, "0", Strategy::Full, 3);
  std::string dot = export_dot(single);
  CHECK(dot.find("\"1 : 0\"") != std::string::npos);
  CHECK(dot.find("->") == std::string::npos);

  Rst one = tree(rw, "g", Strategy::Full, 1);
  CHECK(one.nodes.size() == 3);
  std::string d1 = export_rst(one, "dot");
  std::size_t edges = 0;
  for (std::size_t at = d1.find("->"); at != std::string::npos; at = d1.find("->", at + 1)) ++edges;
  CHECK(edges == 2);

  Rst r = tree(rw, "g", Strategy::Full, 4);
  Rst back = import_rst_json(export_rst(r, "json"));
  REQUIRE(back.nodes.size() == r.nodes.size());
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    CHECK(back.nodes[i].term == r.nodes[i].term);
    CHECK(back.nodes[i].p == r.nodes[i].p);
    CHECK(back.nodes[i].kind == r.nodes[i].kind);
  }
  CHECK(conv_prefix(back, 4) == conv_prefix(r, 4));
  CHECK(edl_prefix(back, 4) == edl_prefix(r, 4));
  CHECK_THROWS_AS(export_rst(r, "svg"), Error);
}
