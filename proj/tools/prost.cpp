#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "prost/analyzer.hpp"

using json = nlohmann::json;
using namespace prost;

namespace {

struct Flags {
  bool json = false;
  std::uint64_t seed = 1;
  std::size_t depth = 20;
  std::size_t max_nodes = 1'000'000;
  std::size_t samples = 10'000;
  std::size_t cap = 1'000;
  std::string strategy = "i";
  std::string scheduler = "first";
  std::vector<std::string> start;
  std::size_t basic_enum = 0;
  bool assume_spare = false;
  bool merge = false;
  unsigned workers = 1;
  std::size_t wcr_depth = 3;
  bool spare_search = false;
  std::string engine = "auto";
  std::string format = "dot";
  std::string kind = "both";
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io-error", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Ptrs load(const std::string& path) {
  try {
    return parse_ptrs(read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.message());
  }
}

std::vector<Term> start_terms(const Ptrs& p, const Flags& f) {
  std::vector<Term> out;
  for (const std::string& s : f.start) out.push_back(parse_term(s, p));
  if (f.basic_enum > 0)
    for (Term& t : basic_terms(p, f.basic_enum)) out.push_back(std::move(t));
  if (out.empty()) throw Error("usage-error", "no start term: pass --start <term> or --basic-enum <size>");
  return out;
}

const char* yes_no(bool b) { return b ? "yes" : "no"; }

void add_common(CLI::App* c, Flags& f) { c->add_flag("--json", f.json, "JSON output"); }

void add_sim(CLI::App* c, Flags& f) {
  c->add_option("--strategy", f.strategy, "f, i, li or sim")->check(CLI::IsMember({"f", "i", "li", "sim"}));
  c->add_option("--scheduler", f.scheduler, "first, rightmost, random or exhaustive")
      ->check(CLI::IsMember({"first", "rightmost", "random", "exhaustive"}));
  c->add_option("--seed", f.seed, "random seed");
  c->add_option("--start", f.start, "start term (repeatable)");
  c->add_option("--basic-enum", f.basic_enum, "use every basic term up to this size as a start term");
  c->add_option("--depth", f.depth, "exploration depth");
  c->add_option("--max-nodes", f.max_nodes, "node limit for tree exploration");
  c->add_flag("--merge", f.merge, "merge equal terms per level");
}

// ---------------------------------------------------------------------------

int cmd_check(const std::string& file, const Flags& f) {
  Ptrs p = load(file);
  CheckOptions opt;
  opt.wcr_depth = f.wcr_depth;
  opt.spare.search = f.spare_search;
  PropertyReport r = check_properties(p, opt);
  auto split = detect_infinite_splits(p);
  if (f.json) {
    json j = to_json(r);
    j["signature"] = {{"defined", to_json(p.defined())}, {"constructors", to_json(p.constructors())}};
    j["splits"] = split ? json(describe(*split, p)) : json(nullptr);
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  auto syms = [](const std::vector<Symbol>& v) {
    std::string s;
    for (const Symbol& x : v) s += (s.empty() ? "" : ", ") + to_string(x);
    return s.empty() ? std::string("-") : s;
  };
  std::cout << "rules         " << p.size() << "\n"
            << "defined       " << syms(p.defined()) << "\n"
            << "constructors  " << syms(p.constructors()) << "\n\n";
  std::cout << std::left;
  auto row = [](const std::string& k, const std::string& v) { std::cout << "  " << std::setw(22) << k << v << "\n"; };
  row("left-linear (LL)", yes_no(r.left_linear));
  row("right-linear (RL)", yes_no(r.right_linear));
  row("linear", yes_no(r.linear));
  row("non-erasing (NE)", yes_no(r.non_erasing));
  row("non-overlapping (NO)", yes_no(r.non_overlapping));
  row("overlay (OS)", yes_no(r.overlay));
  row("orthogonal (OR)", yes_no(r.orthogonal));
  row("spare (SP)", std::string(to_string(r.spare.kind)) + " (" + r.spare.justification + ")");
  row("trivial probabilities", yes_no(r.trivial));
  row("WCR-bounded", r.wcr ? std::string(to_string(*r.wcr)) + " (depth " + std::to_string(r.wcr_depth) + ")"
                           : std::string("n/a (probabilistic)"));
  row("infinite splits", split ? describe(*split, p) : std::string("none detected"));
  if (!r.overlaps.empty()) {
    std::cout << "\noverlaps\n";
    for (const Overlap& o : r.overlaps)
      std::cout << "  rule " << o.outer + 1 << " / rule " << o.inner + 1 << " at " << to_string(o.position) << "  "
                << to_string(o.unifier) << "\n";
  }
  return 0;
}

int cmd_analyze(const std::string& file, const Flags& f) {
  Ptrs p = load(file);
  AnalyzeOptions opt;
  opt.check.wcr_depth = f.wcr_depth;
  opt.check.spare.search = f.spare_search;
  opt.claims.assume_spare = f.assume_spare;
  if (!f.start.empty() || f.basic_enum > 0)
    for (const Term& t : start_terms(p, f))
      opt.simulations.push_back({t, parse_strategy(f.strategy), parse_scheduler(f.scheduler, f.seed), f.depth,
                                 f.max_nodes, f.merge});
  AnalysisReport a = analyze(p, opt);
  if (f.json) {
    std::cout << to_json(a).dump(2) << "\n";
    return 0;
  }
  std::cout << "input " << file << "  (" << a.rules << " rules, digest " << a.digest << ")\n";
  if (!a.assumptions.empty()) {
    std::cout << "assuming";
    for (const auto& s : a.assumptions) std::cout << " " << s;
    std::cout << "\n";
  }
  if (a.split) std::cout << "split witness: " << a.split_text << "\n";
  std::cout << "\nclaims\n";
  for (const Claim& c : a.claims) std::cout << "  " << to_string(c) << "\n";
  for (const Decomposition* d : {&a.disjoint, &a.shared}) {
    std::cout << "\n" << to_string(d->kind) << " components:";
    for (const auto& comp : d->components) {
      std::cout << " {";
      for (std::size_t i = 0; i < comp.size(); ++i) std::cout << (i ? "," : "") << comp[i] + 1;
      std::cout << "}";
    }
    std::cout << "\n";
  }
  if (!a.evidence.empty()) {
    std::cout << "\nevidence\n";
    for (const json& e : a.evidence) std::cout << "  " << e.dump() << "\n";
  }
  return 0;
}

json simulate_one(const Ptrs& p, const Term& t, const Flags& f) {
  Strategy s = parse_strategy(f.strategy);
  SchedulerPolicy policy = parse_scheduler(f.scheduler, f.seed);
  json j{{"start", t.str()}, {"strategy", to_string(s)}, {"scheduler", f.scheduler}, {"depth", f.depth}};
  auto put = [&](const Rational& conv, const Rational& edl) {
    j["conv_prefix"] = to_string(conv);
    j["conv_prefix_approx"] = to_double(conv);
    j["edl_prefix"] = to_string(edl);
    j["edl_prefix_approx"] = to_double(edl);
  };
  if (policy.kind == SchedulerPolicy::ExhaustiveBranch) {
    AdversarialResult r = adversarial_bounds(p, t, s, f.depth, f.max_nodes);
    j["engine"] = "adversarial";
    j["min_conv_prefix"] = to_string(r.min_conv);
    j["min_conv_prefix_approx"] = to_double(r.min_conv);
    j["max_edl_prefix"] = to_string(r.max_edl);
    j["max_edl_prefix_approx"] = to_double(r.max_edl);
    j["budget_exceeded"] = r.budget_exceeded;
    j["states"] = r.states;
    return j;
  }
  bool exact_ok = policy.position_local();
  if (f.engine == "exact" && !exact_ok)
    throw Error("usage-error", "the exact engine needs the first or rightmost scheduler");
  if (f.engine != "exact") {
    Rst rst = build_rst(p, t, s, policy, ExploreOptions{f.depth, f.max_nodes, f.merge, false});
    if (!rst.node_limit_hit || f.engine == "rst" || !exact_ok) {
      std::size_t h = rst.complete ? f.depth : rst.horizon;
      j["engine"] = "rst";
      j["horizon"] = h;
      j["complete"] = rst.complete;
      j["node_limit_hit"] = rst.node_limit_hit;
      put(conv_prefix(rst, h), edl_prefix(rst, h));
      return j;
    }
  }
  Metrics m = exact_metrics(p, t, s, policy, f.depth);
  j["engine"] = "exact";
  j["horizon"] = f.depth;
  put(m.conv[f.depth], m.edl[f.depth]);
  return j;
}

int cmd_simulate(const std::string& file, const Flags& f) {
  Ptrs p = load(file);
  json all = json::array();
  for (const Term& t : start_terms(p, f)) all.push_back(simulate_one(p, t, f));
  if (f.json) {
    std::cout << (all.size() == 1 ? all[0] : all).dump(2) << "\n";
    return 0;
  }
  for (const json& j : all) {
    std::cout << "start " << j["start"].get<std::string>() << "  strategy " << j["strategy"].get<std::string>()
              << "  scheduler " << j["scheduler"].get<std::string>() << "  engine "
              << j["engine"].get<std::string>() << "\n";
    if (j["engine"] == "adversarial") {
      std::cout << "  min conv_prefix(" << f.depth << ") = " << j["min_conv_prefix"].get<std::string>() << " ~ "
                << j["min_conv_prefix_approx"].get<double>() << "\n"
                << "  max edl_prefix(" << f.depth << ")  = " << j["max_edl_prefix"].get<std::string>() << " ~ "
                << j["max_edl_prefix_approx"].get<double>() << "\n";
      if (j["budget_exceeded"].get<bool>()) std::cout << "  (state budget exceeded: bounds are one-sided)\n";
      continue;
    }
    std::size_t h = j["horizon"].get<std::size_t>();
    std::cout << std::setprecision(10) << "  conv_prefix(" << h << ") = " << j["conv_prefix_approx"].get<double>()
              << "\n  edl_prefix(" << h << ")  = " << j["edl_prefix_approx"].get<double>() << "\n";
    if (j.value("node_limit_hit", false)) std::cout << "  (node limit reached: metrics exact up to depth " << h << ")\n";
  }
  return 0;
}

int cmd_mc(const std::string& file, const Flags& f) {
  Ptrs p = load(file);
  json all = json::array();
  for (const Term& t : start_terms(p, f)) {
    McEstimate e = monte_carlo(p, t, parse_strategy(f.strategy), parse_scheduler(f.scheduler, f.seed), f.samples,
                               f.cap, f.seed, f.workers);
    all.push_back({{"start", t.str()},
                   {"strategy", f.strategy},
                   {"scheduler", f.scheduler},
                   {"samples", e.samples},
                   {"cap", e.cap},
                   {"seed", e.seed},
                   {"terminated_fraction", e.terminated_fraction},
                   {"terminated_fraction_se", e.std_error},
                   {"mean_steps_terminated", e.mean_steps_terminated},
                   {"mean_steps_capped", e.mean_steps},
                   {"mean_steps_capped_se", e.steps_std_error}});
  }
  if (f.json) {
    std::cout << (all.size() == 1 ? all[0] : all).dump(2) << "\n";
    return 0;
  }
  for (const json& j : all)
    std::cout << "start " << j["start"].get<std::string>() << "  samples " << j["samples"] << "  cap " << j["cap"]
              << "  seed " << j["seed"] << "\n"
              << "  terminated fraction   " << j["terminated_fraction"].get<double>() << " +- "
              << j["terminated_fraction_se"].get<double>() << "\n"
              << "  mean steps (capped)   " << j["mean_steps_capped"].get<double>() << " +- "
              << j["mean_steps_capped_se"].get<double>() << "\n"
              << "  mean steps (finished) " << j["mean_steps_terminated"].get<double>() << "\n";
  return 0;
}

int cmd_gen(const std::string& file, const Flags& f) {
  Ptrs p = load(file);
  GeneratorExtension g = generator_rules(p);
  if (f.json) {
    json rules = json::array();
    for (const ProbRule& r : g.rules.rules()) rules.push_back(render_rule(r));
    std::cout << json{{"rules", rules}, {"enc", g.enc}, {"cons", g.cons}, {"argenc", g.argenc}}.dump(2) << "\n";
    return 0;
  }
  std::cout << render(g.rules);
  return 0;
}

int cmd_abs(const std::string& file1, const std::string& file2, const Flags& f) {
  Ptrs p1 = load(file1), p2 = load(file2);
  Ptrs both = union_ptrs(p1, p2);
  if (f.start.size() != 1) throw Error("usage-error", "transform abs needs exactly one --start term");
  Term t = parse_term(f.start.front(), both);
  Abstraction a = disjoint_abstraction(t, p1, p2);
  auto strs = [](const std::vector<Term>& v) {
    std::vector<std::string> s;
    for (const Term& q : v) s.push_back(q.str());
    return s;
  };
  if (f.json) {
    std::cout << json{{"start", t.str()}, {"abs1", strs(a.abs1)}, {"abs2", strs(a.abs2)},
                      {"k", a.abs1.size() + a.abs2.size()}}.dump(2)
              << "\n";
    return 0;
  }
  auto show = [](const char* name, const std::vector<Term>& v) {
    std::cout << name << " (" << v.size() << "):";
    for (const Term& q : v) std::cout << " " << q.str();
    std::cout << "\n";
  };
  show("Abs_1", a.abs1);
  show("Abs_2", a.abs2);
  return 0;
}

int cmd_decompose(const std::string& file, const Flags& f) {
  Ptrs p = load(file);
  PropertyReport props = check_properties(p);
  std::vector<Decomposition> ds;
  if (f.kind != "shared") ds.push_back(decompose(p, DecompositionKind::Disjoint, &props));
  if (f.kind != "disjoint") ds.push_back(decompose(p, DecompositionKind::SharedConstructor, &props));
  std::optional<AbstractionBound> bound;
  if (!f.start.empty()) {
    const Decomposition& d = ds.front();
    if (d.kind != DecompositionKind::Disjoint || d.components.size() < 2)
      throw Error("not-decomposable", "the abstraction bound needs at least two disjoint components");
    std::vector<std::size_t> rest;
    for (std::size_t i = 1; i < d.components.size(); ++i)
      rest.insert(rest.end(), d.components[i].begin(), d.components[i].end());
    Ptrs p1 = restrict_rules(p, d.components[0]), p2 = restrict_rules(p, rest);
    bound = abstraction_bound(p1, p2, parse_term(f.start.front(), p), f.depth);
  }
  if (f.json) {
    json j = json::array();
    for (const auto& d : ds) j.push_back(to_json(d));
    json out{{"decompositions", j}};
    if (bound)
      out["abstraction_bound"] = {{"k", bound->k},
                                  {"c_max", bound->c_max_display},
                                  {"c_max_lower", to_string(bound->c_max_lower)},
                                  {"c_max_term", bound->c_max_term.str()},
                                  {"bound", bound->k * bound->c_max_display},
                                  {"text", bound->text}};
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  for (const auto& d : ds) {
    std::cout << to_string(d.kind) << " decomposition: " << d.components.size() << " component(s)\n";
    for (std::size_t c = 0; c < d.components.size(); ++c) {
      std::cout << "  component " << c + 1 << ":\n";
      for (std::size_t i : d.components[c]) std::cout << "    " << i + 1 << ". " << render_rule(p.rule(i)) << "\n";
    }
    for (const auto& t : d.theorems)
      std::cout << "  " << (t.modular ? "modular     " : "NOT modular ") << t.property << "  -- " << t.cite << "\n";
  }
  if (bound) std::cout << "\n" << bound->text << "\n";
  return 0;
}

int cmd_export(const std::string& file, const Flags& f) {
  Ptrs p = load(file);
  if (f.start.size() != 1) throw Error("usage-error", "export-rst needs exactly one --start term");
  Rst rst = build_rst(p, parse_term(f.start.front(), p), parse_strategy(f.strategy),
                      parse_scheduler(f.scheduler, f.seed), ExploreOptions{f.depth, f.max_nodes, f.merge, true});
  std::cout << export_rst(rst, f.json ? "json" : f.format);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prost: probabilistic term rewriting analysis"};
  app.require_subcommand(1);
  Flags f;
  std::string file, file2;

  auto* check = app.add_subcommand("check", "syntactic properties");
  check->add_option("file", file, "PTRS file")->required();
  add_common(check, f);
  check->add_option("--wcr-depth", f.wcr_depth, "search depth for joining critical pairs");
  check->add_flag("--spare-search", f.spare_search, "search for a non-spare rewrite sequence");

  auto* an = app.add_subcommand("analyze", "applicable transfer and modularity claims");
  an->add_option("file", file, "PTRS file")->required();
  add_common(an, f);
  add_sim(an, f);
  an->add_flag("--assume-spare", f.assume_spare, "treat the system as spare");
  an->add_option("--wcr-depth", f.wcr_depth, "search depth for joining critical pairs");
  an->add_flag("--spare-search", f.spare_search, "search for a non-spare rewrite sequence");

  auto* sim = app.add_subcommand("simulate", "exact bounded exploration");
  sim->add_option("file", file, "PTRS file")->required();
  add_common(sim, f);
  add_sim(sim, f);
  sim->add_option("--engine", f.engine, "auto, rst or exact")->check(CLI::IsMember({"auto", "rst", "exact"}));

  auto* mc = app.add_subcommand("mc", "Monte Carlo estimation");
  mc->add_option("file", file, "PTRS file")->required();
  add_common(mc, f);
  add_sim(mc, f);
  mc->add_option("--samples", f.samples, "number of runs");
  mc->add_option("--cap", f.cap, "step cap per run");
  mc->add_option("--workers", f.workers, "worker threads");

  auto* tr = app.add_subcommand("transform", "generator rules and abstractions");
  tr->require_subcommand(1);
  auto* gen = tr->add_subcommand("gen", "generator rules");
  gen->add_option("file", file, "PTRS file")->required();
  add_common(gen, f);
  auto* abs = tr->add_subcommand("abs", "disjoint-union abstraction");
  abs->add_option("file1", file, "first PTRS")->required();
  abs->add_option("file2", file2, "second PTRS")->required();
  abs->add_option("--start", f.start, "term over the union signature")->required();
  add_common(abs, f);

  auto* dec = app.add_subcommand("decompose", "disjoint and shared-constructor components");
  dec->add_option("file", file, "PTRS file")->required();
  add_common(dec, f);
  dec->add_option("--kind", f.kind, "disjoint, shared or both")->check(CLI::IsMember({"disjoint", "shared", "both"}));
  dec->add_option("--start", f.start, "start term for the abstraction bound");
  dec->add_option("--depth", f.depth, "depth for the height lower bounds");

  auto* ex = app.add_subcommand("export-rst", "write a rewrite sequence tree");
  ex->add_option("file", file, "PTRS file")->required();
  add_common(ex, f);
  add_sim(ex, f);
  ex->add_option("--format", f.format, "dot or json")->check(CLI::IsMember({"dot", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*check) return cmd_check(file, f);
    if (*an) return cmd_analyze(file, f);
    if (*sim) return cmd_simulate(file, f);
    if (*mc) return cmd_mc(file, f);
    if (*gen) return cmd_gen(file, f);
    if (*abs) return cmd_abs(file, file2, f);
    if (*dec) return cmd_decompose(file, f);
    if (*ex) return cmd_export(file, f);
  } catch (const Error& e) {
    std::cerr << "error [" << e.kind() << "]: " << e.message() << "\n";
    return e.kind() == "usage-error" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
