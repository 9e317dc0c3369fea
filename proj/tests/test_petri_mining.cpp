#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "support/oracles.hpp"
#include "vpm/alignment.hpp"
#include "vpm/detector_sim.hpp"
#include "vpm/discovery.hpp"
#include "vpm/error.hpp"
#include "vpm/petri_net.hpp"
#include "vpm/precision.hpp"
#include "vpm/process_tree.hpp"

using namespace vpm;
using oracle::Seq;

namespace {

PetriNet chain(const std::vector<std::string>& labels) {
  PetriNet net;
  std::size_t prev = net.add_place("p0");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::size_t t = net.add_transition("t" + std::to_string(i), labels[i]);
    std::size_t next = net.add_place("p" + std::to_string(i + 1));
    net.add_input_arc(prev, t);
    net.add_output_arc(t, next);
    prev = next;
  }
  Marking init = net.empty_marking(), fin = net.empty_marking();
  init.front() = 1;
  fin.back() = 1;
  net.set_initial_marking(init);
  net.set_final_marking(fin);
  return net;
}

// One place with a self-loop per label; initial = final.
PetriNet flower(const std::vector<std::string>& labels) {
  PetriNet net;
  std::size_t p = net.add_place("hub");
  for (const auto& l : labels) {
    std::size_t t = net.add_transition(l, l);
    net.add_input_arc(p, t);
    net.add_output_arc(t, p);
  }
  net.set_initial_marking({1});
  net.set_final_marking({1});
  return net;
}

std::vector<LabelSequence> repeat(const std::vector<std::pair<Seq, int>>& v) {
  std::vector<LabelSequence> out;
  for (const auto& [s, n] : v)
    for (int i = 0; i < n; ++i) out.push_back(s);
  return out;
}

std::vector<LabelSequence> as_log(const std::set<Seq>& lang) { return {lang.begin(), lang.end()}; }

}  // namespace

TEST_CASE("enabled and fire") {
  PetriNet one = chain({"a"});
  auto en = one.enabled_transitions(one.initial_marking());
  REQUIRE(en.size() == 1);
  CHECK(*one.transitions()[en[0]].label == "a");
  CHECK(one.fire(one.initial_marking(), en[0]) == one.final_marking());
  CHECK(one.enabled_transitions(one.empty_marking()).empty());
  CHECK_THROWS_AS(one.fire(one.empty_marking(), 0), NotEnabled);

  PetriNet abc = chain({"a", "b", "c"});
  Marking m = abc.initial_marking();
  for (const char* want : {"a", "b", "c"}) {
    auto e = abc.enabled_transitions(m);
    REQUIRE(e.size() == 1);
    CHECK(*abc.transitions()[e[0]].label == want);
    m = abc.fire(m, e[0]);
  }
  CHECK(m == abc.final_marking());
  CHECK(abc.enabled_transitions(m).empty());
}

TEST_CASE("net validation") {
  PetriNet net = chain({"a"});
  net.set_final_marking({});
  CHECK_THROWS_AS(net.validate(), InvalidNet);
  PetriNet empty_init = chain({"a"});
  empty_init.set_initial_marking(empty_init.empty_marking());
  CHECK_THROWS_AS(empty_init.validate(), InvalidNet);
  CHECK_NOTHROW(chain({"a", "b"}).validate());
}

TEST_CASE("align examples") {
  PetriNet abc = chain({"a", "b", "c"});
  auto fit = align_trace({"a", "b", "c"}, abc);
  CHECK(fit.cost == 0);
  CHECK(fit.count(MoveType::synchronous) == 3);
  CHECK(fit.firing_sequence().size() == 3);

  auto extra = align_trace({"a", "b"}, chain({"a"}));
  CHECK(extra.cost == 1);
  CHECK(extra.count(MoveType::log) == 1);
  CHECK(extra.count(MoveType::synchronous) == 1);

  // A model move on a, then b synchronously.
  auto late = align_trace({"b"}, chain({"a", "b"}));
  CHECK(late.cost == 1);
  CHECK(late.cost == *oracle::brute_force_cost({"b"}, chain({"a", "b"})));
  CHECK(late.visible_model_moves() == 1);

  PetriNet dead = chain({"a"});
  dead.set_final_marking({1, 1});
  CHECK_THROWS_AS(align_trace({"a"}, dead), FinalUnreachable);

  AlignOptions tight;
  tight.state_budget = 2;
  CHECK_THROWS_AS(align_trace({"x", "y", "z"}, chain({"a", "b", "c"}), tight), StateBudgetExceeded);
}

TEST_CASE("alignment projections") {
  PetriNet net = tree_to_net(ProcessTree::sequence({ProcessTree::activity("a"),
                                                    ProcessTree::exclusive({ProcessTree::activity("b"),
                                                                            ProcessTree::silent()}),
                                                    ProcessTree::activity("c")}));
  for (const Seq& trace : {Seq{"a", "c"}, Seq{"c"}, Seq{"b", "a", "x", "c"}, Seq{}}) {
    auto al = align_trace(trace, net);
    Seq log_side;
    Marking m = net.initial_marking();
    for (const auto& mv : al.moves) {
      if (mv.type != MoveType::model) log_side.push_back(mv.label);
      if (mv.transition) m = net.fire(m, *mv.transition);
    }
    CHECK(log_side == trace);
    CHECK(m == net.final_marking());
  }
}

TEST_CASE("alignment cost equals the exhaustive optimum") {
  std::mt19937_64 rng(99);
  oracle::NetGen gen(17);
  const char* labels[] = {"a", "b", "c", "d", "e"};
  int compared = 0;
  for (int round = 0; round < 400; ++round) {
    PetriNet net = gen.make(8);
    for (int k = 0; k < 4; ++k) {
      Seq trace;
      for (std::size_t i = 0, n = rng() % 7; i < n; ++i) trace.push_back(labels[rng() % 5]);
      auto expected = oracle::brute_force_cost(trace, net);
      if (!expected) {
        CHECK_THROWS_AS(align_trace(trace, net), FinalUnreachable);
        continue;
      }
      auto al = align_trace(trace, net);
      CHECK(al.cost == *expected);
      ++compared;
    }
  }
  CHECK(compared > 500);
}

TEST_CASE("alignment cost against the tree language") {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    ProcessTree tree = oracle::TreeGen(seed).make(3, 5);
    PetriNet net = tree_to_net(tree);
    auto lang = oracle::tree_language(tree);
    for (int k = 0; k < 3; ++k) {
      Seq trace;
      for (std::size_t i = 0, n = rng() % 6; i < n; ++i) trace.push_back(std::string(1, static_cast<char>('a' + rng() % 6)));
      CHECK(align_trace(trace, net).cost == *oracle::language_cost(trace, lang));
    }
  }
}

TEST_CASE("fitness") {
  PetriNet abc = chain({"a", "b", "c"});
  auto perfect = log_fitness({{"a", "b", "c"}, {"a", "b", "c"}}, abc);
  CHECK(perfect.fitness == 1.0);
  CHECK(perfect.log_moves == 0);
  CHECK(perfect.model_moves == 0);

  auto r = log_fitness({{"a", "b"}}, chain({"a"}));
  CHECK(r.traces[0].denominator == 3);
  CHECK(r.fitness == doctest::Approx(2.0 / 3));
  CHECK(r.model_only_cost == 1);

  // Cost sum versus trace average.
  std::vector<LabelSequence> log{{"a", "b", "c"}, {"x"}};
  auto sum = log_fitness(log, abc);
  auto avg = log_fitness(log, abc, {}, FitnessAggregation::trace_average);
  CHECK(sum.fitness == doctest::Approx(1.0 - 4.0 / (6.0 + 4.0)));
  CHECK(avg.fitness == doctest::Approx((1.0 + 0.0) / 2));

  oracle::NetGen gen(5);
  std::mt19937_64 rng(6);
  for (int round = 0; round < 200; ++round) {
    PetriNet net = gen.make(6);
    if (!oracle::brute_force_cost({}, net)) continue;
    Seq trace;
    for (std::size_t i = 0, n = rng() % 5; i < n; ++i) trace.push_back(std::string(1, static_cast<char>('a' + rng() % 4)));
    auto f = log_fitness({trace}, net);
    CHECK(f.fitness >= 0.0);
    CHECK(f.fitness <= 1.0);
    CHECK((f.fitness == 1.0) == (*oracle::brute_force_cost(trace, net) == 0));
  }
}

TEST_CASE("fitness report json") {
  auto j = nlohmann::json::parse(log_fitness({{"a", "b"}}, chain({"a"})).to_json());
  CHECK(j["fitness"].get<double>() == doctest::Approx(2.0 / 3));
  CHECK(j["log_moves"] == 1);
  CHECK(j["per_trace"].size() == 1);
}

TEST_CASE("tree to net") {
  PetriNet leaf = tree_to_net(ProcessTree::activity("a"));
  CHECK(leaf.places().size() == 2);
  CHECK(leaf.transitions().size() == 1);

  auto seq = tree_to_net(ProcessTree::sequence({ProcessTree::activity("a"), ProcessTree::activity("b")}));
  CHECK(oracle::net_language(seq, 6) == std::set<Seq>{{"a", "b"}});
  auto xr = tree_to_net(ProcessTree::exclusive({ProcessTree::activity("a"), ProcessTree::activity("b")}));
  CHECK(oracle::net_language(xr, 6) == std::set<Seq>{{"a"}, {"b"}});
  auto par = tree_to_net(ProcessTree::parallel({ProcessTree::activity("a"), ProcessTree::activity("b")}));
  CHECK(oracle::net_language(par, 6) == std::set<Seq>{{"a", "b"}, {"b", "a"}});
  auto lp = tree_to_net(ProcessTree::loop({ProcessTree::activity("a"), ProcessTree::activity("b")}));
  CHECK(oracle::net_language(lp, 5) == std::set<Seq>{{"a"}, {"a", "b", "a"}, {"a", "b", "a", "b", "a"}});
}

TEST_CASE("tree to net preserves the language") {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    ProcessTree tree = oracle::TreeGen(seed).make(3, 5);
    PetriNet net = tree_to_net(tree);
    CHECK_NOTHROW(net.validate());
    CHECK(oracle::net_language(net, 6) == oracle::tree_language(tree));
  }
}

TEST_CASE("tree notation") {
  auto t = ProcessTree::sequence({ProcessTree::activity("a"),
                                  ProcessTree::exclusive({ProcessTree::activity("b"), ProcessTree::silent()}),
                                  ProcessTree::parallel({ProcessTree::activity("c"), ProcessTree::activity("d")}),
                                  ProcessTree::loop({ProcessTree::activity("e"), ProcessTree::silent()})});
  CHECK(to_string(t) == "->(a, X(b, tau), +(c, d), *(e, tau))");
  CHECK(t.activity_count() == 5);
  CHECK(t.depth() == 2);
  CHECK_THROWS_AS(ProcessTree::loop({ProcessTree::activity("a")}).validate(), Error);
}

TEST_CASE("directly follows graph") {
  auto dfg = build_dfg(to_variant_log(repeat({{{"a", "b"}, 3}, {{"a", "c"}, 2}, {{}, 1}})));
  CHECK(dfg.edge("a", "b") == 3);
  CHECK(dfg.edge("a", "c") == 2);
  CHECK(!dfg.has_edge("b", "c"));
  CHECK(dfg.start.at("a") == 5);
  CHECK(dfg.end.at("b") == 3);
  CHECK(dfg.traces == 6);
  CHECK(dfg.empty_traces == 1);
  CHECK(dfg.counts.at("a") == 5);

  auto f = filter_dfg(dfg, 0.8);
  CHECK(f.has_edge("a", "b"));
  CHECK(!f.has_edge("a", "c"));
  CHECK_THROWS_AS(filter_dfg(dfg, 1.5), Error);
}

TEST_CASE("filtering only removes edges") {
  std::mt19937_64 rng(12);
  for (int round = 0; round < 200; ++round) {
    std::vector<LabelSequence> log;
    for (int i = 0, n = 1 + static_cast<int>(rng() % 30); i < n; ++i) {
      LabelSequence s;
      for (std::size_t k = 0, m = rng() % 6; k < m; ++k) s.push_back(std::string(1, static_cast<char>('a' + rng() % 5)));
      log.push_back(s);
    }
    auto dfg = build_dfg(to_variant_log(log));
    auto prev = dfg;
    for (double f : {0.0, 0.1, 0.25, 0.5, 0.75, 1.0}) {
      auto cur = filter_dfg(dfg, f);
      for (const auto& [e, n] : cur.edges) {
        CHECK(prev.has_edge(e.first, e.second));
        CHECK(n == dfg.edge(e.first, e.second));
      }
      for (const auto& [a, n] : cur.start) CHECK(prev.start.count(a) == 1);
      for (const auto& [a, n] : cur.end) CHECK(prev.end.count(a) == 1);
      prev = cur;
    }
    CHECK(filter_dfg(dfg, 0.0).edges == dfg.edges);
  }
}

TEST_CASE("inductive miner examples") {
  CHECK(to_string(discover_imf(repeat({{{"a"}, 5}}), 0.0)) == "a");
  auto tree = discover_imf(repeat({{{"a", "b"}, 3}, {{"a", "c"}, 2}}), 0.0);
  CHECK(to_string(tree) == "->(a, X(b, c))");
  CHECK(log_fitness(repeat({{{"a", "b"}, 3}, {{"a", "c"}, 2}}), tree_to_net(tree)).fitness == 1.0);

  auto filtered = discover_imf(repeat({{{"a", "b"}, 99}, {{"a", "a", "b"}, 1}}), 0.2);
  CHECK(to_string(filtered) == "->(a, b)");
  CHECK(log_fitness(repeat({{{"a", "b"}, 99}}), tree_to_net(filtered)).fitness == 1.0);

  CHECK(to_string(discover_imf(repeat({{{"a", "b"}, 2}, {{"b", "a"}, 2}}), 0.0)) == "+(a, b)");
  CHECK(to_string(discover_imf(repeat({{{"a"}, 2}, {{"a", "b", "a"}, 2}}), 0.0)) == "*(a, b)");
  CHECK(to_string(discover_imf(repeat({{{"a"}, 3}, {{}, 2}}), 0.0)) == "X(tau, a)");
  CHECK_THROWS_AS(discover_imf(repeat({{{"a"}, 1}}), -0.1), Error);
}

TEST_CASE("inductive miner rediscovers play-out logs") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    ProcessTree tree = oracle::TreeGen(seed).make(3, 5);
    auto lang = oracle::tree_language(tree);
    auto log = as_log(lang);
    ProcessTree found = discover_imf(log, 0.0);
    PetriNet net = tree_to_net(found);
    INFO("tree ", to_string(tree), " found ", to_string(found));
    CHECK(log_fitness(log, net).fitness == 1.0);
    CHECK(etc_precision(log, net) == doctest::Approx(1.0));
  }
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    ProcessTree tree = oracle::TreeGen(seed, true).make(3, 5);
    auto log = as_log(oracle::tree_language(tree, 2));
    ProcessTree found = discover_imf(log, 0.0);
    INFO("tree ", to_string(tree), " found ", to_string(found));
    CHECK(log_fitness(log, tree_to_net(found)).fitness == 1.0);
  }
}

TEST_CASE("precision") {
  PetriNet ab = chain({"a", "b"});
  CHECK(etc_precision({{"a", "b"}}, ab) == 1.0);
  auto fl = etc_precision_report({{"a"}}, flower({"a", "b"}));
  CHECK(fl.precision == doctest::Approx(0.5));
  CHECK(fl.reflected == 1);
  CHECK(fl.available == 2);
  CHECK(etc_precision({{"a"}, {"b", "a"}}, flower({"a", "b"})) < 1.0);
  CHECK_THROWS_AS(etc_precision({}, ab), EmptyLog);

  auto xr = tree_to_net(ProcessTree::exclusive({ProcessTree::activity("a"), ProcessTree::activity("b")}));
  CHECK(etc_precision({{"a"}}, xr) == doctest::Approx(0.5));
  CHECK(etc_precision({{"a"}, {"b"}}, xr) == doctest::Approx(1.0));
  CHECK(enabled_visible_closure(xr, xr.initial_marking()) == std::set<std::string>{"a", "b"});
}

TEST_CASE("variant models") {
  auto one = build_model_from_variants({{"v1", {"a", "b"}}});
  CHECK(oracle::net_language(one, 6) == std::set<Seq>{{"a", "b"}});
  auto two = build_model_from_variants({{"v1", {"a", "b"}}, {"v2", {"a", "c"}}});
  CHECK(oracle::net_language(two, 6) == std::set<Seq>{{"a", "b"}, {"a", "c"}});
  auto pre = build_model_from_variants({{"v1", {"a"}}, {"v2", {"a", "b"}}});
  CHECK(oracle::net_language(pre, 6) == std::set<Seq>{{"a"}, {"a", "b"}});

  std::vector<Variant> crepe;
  std::set<Seq> expected;
  int k = 0;
  for (const auto& v : synthetic_crepe_variants()) {
    crepe.push_back({"variant" + std::to_string(++k), v});
    expected.insert(v);
  }
  PetriNet net = build_model_from_variants(crepe);
  CHECK(oracle::net_language(net, 12) == expected);
  CHECK(to_string(build_tree_from_variants(crepe)).rfind("->(stir, pour, spread, ", 0) == 0);

  std::istringstream spec("# recipes\nv1: a,b\n\nv2: a, c\n");
  auto parsed = parse_variant_spec(spec);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[1].activities == std::vector<std::string>{"a", "c"});
  std::istringstream dup("v1: a\nv1: b\n");
  CHECK_THROWS_AS(parse_variant_spec(dup), DuplicateVariantName);
  std::istringstream bad("no colon here\n");
  CHECK_THROWS_AS(parse_variant_spec(bad), ParseError);
}

TEST_CASE("pnml round trip") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    PetriNet net = tree_to_net(oracle::TreeGen(seed, true).make(3, 5));
    std::string xml = export_pnml(net);
    PetriNet back = import_pnml(xml);
    CHECK(export_pnml(back) == xml);
    CHECK(back.initial_marking() == net.initial_marking());
    CHECK(back.final_marking() == net.final_marking());
    CHECK(oracle::net_language(back, 5) == oracle::net_language(net, 5));
  }
  PetriNet two_tokens = chain({"a"});
  two_tokens.set_initial_marking({2, 0});
  two_tokens.set_final_marking({0, 2});
  CHECK(import_pnml(export_pnml(two_tokens)).initial_marking() == Marking{2, 0});
  CHECK_THROWS_AS(import_pnml("<pnml><net>"), ParseError);
}
