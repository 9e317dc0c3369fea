#include <limits>
#include <sstream>

#include "doctest.h"
#include "vpm/detector_sim.hpp"
#include "vpm/error.hpp"
#include "vpm/event_aggregator.hpp"
#include "vpm/io.hpp"

using namespace vpm;

namespace {

const char* kHeader = "video_id,t,resource,case_id,class\n";

std::vector<GroundTruthAnnotation> parse(const std::string& text, const ClassRegistry* strict = nullptr) {
  std::istringstream in(text);
  return load_annotations(in, strict);
}

// Reference FNV-1a 64 over raw bytes.
std::uint64_t fnv_ref(const std::vector<unsigned char>& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

ActivityClass top_class(const LowLevelEvent& e) {
  ActivityClass best;
  double s = -1;
  for (const auto& [c, v] : e.scores) {
    if (v > s) {
      s = v;
      best = c;
    }
  }
  return best;
}

std::vector<GroundTruthAnnotation> scenario(std::uint64_t seed, int resources = 3, std::int64_t duration = 120) {
  ScenarioConfig cfg;
  cfg.variants = synthetic_crepe_variants();
  cfg.resources = resources;
  cfg.duration_s = duration;
  cfg.seed = seed;
  return synthesize_annotations(cfg);
}

}  // namespace

TEST_CASE("load_annotations") {
  CHECK(parse(kHeader).empty());
  auto three = parse(std::string(kHeader) + "v,0,r1,c1,stir\nv,1,r1,c1,stir\nv,2,r1,,undefined\n");
  CHECK(three.size() == 3);
  CHECK(three[2].cls.is_undefined());

  auto crepe = ClassRegistry::crepe();
  try {
    parse(std::string(kHeader) + "v,0,r1,c1,stir\nv,1,r1,c1,bake\n", &crepe);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_NOTHROW(parse(std::string(kHeader) + "v,1,r1,c1,bake\n"));
  CHECK_THROWS_AS(parse("video,t,resource,case,class\n"), ParseError);
  CHECK_THROWS_AS(parse(std::string(kHeader) + "v,x,r1,c1,stir\n"), ParseError);
  CHECK_THROWS_AS(parse(std::string(kHeader) + "v,0,r1,c1\n"), ParseError);
  CHECK_THROWS_AS(parse(std::string(kHeader) + "v,0,r1,,stir\n"), ParseError);
  CHECK_THROWS_AS(parse(std::string(kHeader) + "v,0,r1,c1,stir\nv,0,r1,c1,pour\n"), DuplicateKey);
}

TEST_CASE("annotation CSV round trip") {
  auto anns = scenario(3);
  std::ostringstream out;
  write_annotations_csv(out, anns);
  CHECK(parse(out.str()) == anns);
}

TEST_CASE("annotations_to_true_log") {
  auto anns = parse(std::string(kHeader) +
                    "v,0,r1,c1,stir\nv,1,r1,c1,stir\nv,2,r1,c1,stir\nv,3,r1,c1,pour\nv,4,r1,c1,pour\n");
  EventLog log = annotations_to_true_log(anns);
  REQUIRE(log.traces.size() == 1);
  CHECK(log.traces[0].case_id == "c1");
  auto inst = log_instances(log);
  REQUIRE(inst.size() == 2);
  CHECK(inst[0].cls.label() == "stir");
  CHECK(inst[0].start_ms == 0);
  CHECK(inst[0].complete_ms == 3000);
  CHECK(inst[1].cls.label() == "pour");
  CHECK(inst[1].start_ms == 3000);
  CHECK(inst[1].complete_ms == 5000);

  auto undef = parse(std::string(kHeader) + "v,0,r1,,undefined\nv,1,r1,,undefined\n");
  CHECK(annotations_to_true_log(undef).traces.empty());
}

TEST_CASE("sub-seed derivation") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  std::uint64_t seed = 0x0102030405060708ULL;
  std::vector<unsigned char> bytes{0x08, 0x07, 0x06, 0x05, 0x04, 0x03, 0x02, 0x01, 'v', 'i', 'd'};
  CHECK(derive_sub_seed(seed, "vid") == fnv_ref(bytes));
}

TEST_CASE("uniform01 uses the top 53 bits") {
  std::mt19937_64 a(5), b(5);
  double u = uniform01(a);
  CHECK(u == static_cast<double>(b() >> 11) / 9007199254740992.0);
  for (int i = 0; i < 1000; ++i) {
    double v = uniform01(a);
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("simulate_detections") {
  auto anns = scenario(9, 2, 90);
  auto registry = ClassRegistry::crepe();

  SUBCASE("zero noise keeps the annotated class on top") {
    NoiseConfig zero;
    auto stream = simulate_detections(anns, zero, registry);
    REQUIRE(stream.size() == anns.size());
    for (std::size_t i = 0; i < anns.size(); ++i) {
      CHECK(top_class(stream[i]) == anns[i].cls);
      CHECK(stream[i].bbox.has_value());
      CHECK(stream[i].scores.size() == registry.size());
    }
  }
  SUBCASE("score vector shape") {
    NoiseConfig n;
    n.score_sharpness = 3.0;
    auto stream = simulate_detections(anns, n, registry);
    const double k = static_cast<double>(registry.size());
    for (const auto& e : stream) {
      double total = 0;
      for (const auto& [c, v] : e.scores) {
        total += v;
        if (c == top_class(e)) {
          CHECK(v == doctest::Approx(0.75).epsilon(1e-12));
        } else {
          CHECK(v == doctest::Approx(0.25 / (k - 1)).epsilon(1e-12));
        }
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("p_miss = 1 puts undefined on top everywhere") {
    NoiseConfig n;
    n.p_miss = 1.0;
    for (const auto& e : simulate_detections(anns, n, registry)) CHECK(top_class(e).is_undefined());
  }
  SUBCASE("fixed seed is byte-identical") {
    NoiseConfig n;
    n.p_miss = 0.2;
    n.p_split = 0.1;
    n.confusion[ActivityClass("stir")] = {{ActivityClass("stir"), 0.5}, {ActivityClass("pour"), 0.5}};
    n.seed = 42;
    auto a = low_level_to_jsonl(simulate_detections(anns, n, registry));
    auto b = low_level_to_jsonl(simulate_detections(anns, n, registry));
    CHECK(a == b);
    n.seed = 43;
    CHECK(low_level_to_jsonl(simulate_detections(anns, n, registry)) != a);
  }
  SUBCASE("invalid noise") {
    NoiseConfig n;
    n.p_miss = 1.5;
    CHECK_THROWS_AS(n.validate(), Error);
    n = {};
    n.confusion[ActivityClass("stir")] = {{ActivityClass("stir"), 0.5}};
    CHECK_THROWS_AS(n.validate(), Error);
    n = {};
    n.score_sharpness = 0;
    CHECK_THROWS_AS(n.validate(), Error);
  }
}

TEST_CASE("miss rate is close to p_miss") {
  auto anns = scenario(21, 3, 600);
  NoiseConfig n;
  n.p_miss = 0.3;
  n.seed = 1;
  auto stream = simulate_detections(anns, n);
  std::size_t defined = 0, missed = 0;
  for (std::size_t i = 0; i < anns.size(); ++i) {
    if (anns[i].cls.is_undefined()) continue;
    ++defined;
    if (top_class(stream[i]).is_undefined()) ++missed;
  }
  REQUIRE(defined > 1000);
  CHECK(static_cast<double>(missed) / static_cast<double>(defined) == doctest::Approx(0.3).epsilon(0.15));
}

TEST_CASE("zero-noise pipeline equivalence") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto anns = scenario(seed, 1 + static_cast<int>(seed % 4), 60 + static_cast<std::int64_t>(seed) * 2);
    auto truth = log_instances(annotations_to_true_log(anns));
    auto extracted = aggregate_instances(simulate_detections(anns, NoiseConfig{}), AggregatorConfig{});
    for (auto& i : truth) i.case_id.reset();
    for (auto& i : extracted) i.case_id.reset();
    sort_instances(truth);
    sort_instances(extracted);
    CHECK(truth == extracted);
  }
}

TEST_CASE("monotone degradation in p_miss") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto anns = scenario(seed * 7, 3, 120);
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    for (double p : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
      NoiseConfig n;
      n.p_miss = p;
      n.p_split = 0.1;
      n.seed = seed;
      auto inst = aggregate_instances(simulate_detections(anns, n), AggregatorConfig{});
      auto merged = merge_subsequent(default_trace_log(inst));
      std::size_t count = log_instances(merged).size();
      CHECK(count <= previous);
      previous = count;
    }
    CHECK(previous == 0);
  }
}

TEST_CASE("synthetic scenarios respect their domain") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto anns = scenario(seed, 4, 300);
    EventLog log = annotations_to_true_log(anns);
    REQUIRE_FALSE(log.traces.empty());
    for (const auto& t : log.traces) {
      auto inst = events_to_instances(t);
      REQUIRE_FALSE(inst.empty());
      CHECK(inst.front().cls.label() == "stir");
      for (std::size_t i = 1; i < inst.size(); ++i) {
        CHECK(inst[i].cls.label() != "stir");
        CHECK(inst[i].cls != inst[i - 1].cls);
      }
    }
  }
}
