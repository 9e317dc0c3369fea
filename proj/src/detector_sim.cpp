#include "vpm/detector_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "vpm/error.hpp"

namespace vpm {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

void sort_annotations(std::vector<GroundTruthAnnotation>& anns) {
  std::stable_sort(anns.begin(), anns.end(), [](const auto& a, const auto& b) {
    return std::tie(a.video_id, a.t, a.resource) < std::tie(b.video_id, b.t, b.resource);
  });
}

void check_unique(const std::vector<GroundTruthAnnotation>& anns) {
  for (std::size_t i = 1; i < anns.size(); ++i) {
    const auto& a = anns[i - 1];
    const auto& b = anns[i];
    if (a.video_id == b.video_id && a.t == b.t && a.resource == b.resource) {
      throw DuplicateKey("duplicate annotation (" + b.video_id + ", " + std::to_string(b.t) + ", " +
                         b.resource + ")");
    }
  }
}

}  // namespace

void NoiseConfig::validate() const {
  if (!is_probability(p_miss)) throw Error("p_miss outside [0,1]");
  if (!is_probability(p_split)) throw Error("p_split outside [0,1]");
  if (!(score_sharpness > 0.0) || !std::isfinite(score_sharpness)) throw Error("score_sharpness must be > 0");
  for (const auto& [from, row] : confusion) {
    double sum = 0.0;
    for (const auto& [to, p] : row) {
      if (!is_probability(p)) throw Error("confusion probability outside [0,1] in row '" + from.label() + "'");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error("confusion row '" + from.label() + "' does not sum to 1");
  }
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::uint64_t derive_sub_seed(std::uint64_t seed, std::string_view video_id) {
  std::string buf(8, '\0');
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((seed >> (8 * i)) & 0xff);
  return fnv1a64(video_id, fnv1a64(buf));
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<GroundTruthAnnotation> load_annotations(std::istream& in, const ClassRegistry* strict) {
  std::vector<GroundTruthAnnotation> out;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (line != "video_id,t,resource,case_id,class") {
        throw ParseError("expected header 'video_id,t,resource,case_id,class'", lineno);
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 5) throw ParseError("expected 5 fields, got " + std::to_string(f.size()), lineno);
    GroundTruthAnnotation a;
    a.video_id = f[0];
    std::int64_t t = -1;
    auto [p, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), t);
    if (ec != std::errc{} || p != f[1].data() + f[1].size() || t < 0) {
      throw ParseError("invalid second index '" + f[1] + "'", lineno);
    }
    a.t = t;
    a.resource = f[2];
    a.case_id = f[3];
    if (a.video_id.empty() || a.resource.empty()) throw ParseError("empty video_id or resource", lineno);
    if (f[4].empty()) throw ParseError("empty class label", lineno);
    a.cls = ActivityClass{f[4]};
    if (strict && !strict->contains(a.cls)) throw ParseError("unknown class label '" + f[4] + "'", lineno);
    if (!a.cls.is_undefined() && a.case_id.empty()) {
      throw ParseError("class '" + f[4] + "' without case id", lineno);
    }
    out.push_back(std::move(a));
  }
  if (!header_seen) throw ParseError("missing header", 1);
  sort_annotations(out);
  check_unique(out);
  return out;
}

std::vector<GroundTruthAnnotation> load_annotations_file(const std::string& path, const ClassRegistry* strict) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open annotations file '" + path + "'");
  return load_annotations(in, strict);
}

void write_annotations_csv(std::ostream& out, const std::vector<GroundTruthAnnotation>& annotations) {
  out << "video_id,t,resource,case_id,class\n";
  for (const auto& a : annotations) {
    out << a.video_id << ',' << a.t << ',' << a.resource << ',' << a.case_id << ',' << a.cls.label() << '\n';
  }
}

EventLog annotations_to_true_log(const std::vector<GroundTruthAnnotation>& annotations,
                                 const ClassRegistry& registry) {
  auto anns = annotations;
  sort_annotations(anns);
  check_unique(anns);
  std::stable_sort(anns.begin(), anns.end(), [](const auto& a, const auto& b) {
    return std::tie(a.video_id, a.resource, a.case_id, a.t) < std::tie(b.video_id, b.resource, b.case_id, b.t);
  });

  std::map<std::string, std::vector<ActivityInstance>> by_case;
  EventLog log;
  log.class_registry = registry;
  std::size_t i = 0;
  while (i < anns.size()) {
    std::size_t j = i + 1;
    while (j < anns.size() && anns[j].video_id == anns[i].video_id && anns[j].resource == anns[i].resource &&
           anns[j].case_id == anns[i].case_id && anns[j].cls == anns[i].cls && anns[j].t == anns[j - 1].t + 1) {
      ++j;
    }
    const auto& first = anns[i];
    log.class_registry.add(first.cls);
    if (!first.cls.is_undefined()) {
      by_case[first.case_id].push_back({first.cls, first.resource, first.t * kMillisPerSecond,
                                        (anns[j - 1].t + 1) * kMillisPerSecond, first.case_id});
    }
    i = j;
  }
  for (auto& [case_id, instances] : by_case) {
    Trace t;
    t.case_id = case_id;
    t.events = instances_to_events(instances);
    log.traces.push_back(std::move(t));
  }
  return log;
}

BBox resource_bbox(std::string_view resource) {
  std::uint64_t h = fnv1a64(resource);
  double x1 = static_cast<double>(h % 50) / 100.0;
  double y1 = static_cast<double>((h >> 8) % 50) / 100.0;
  return {x1, y1, x1 + 0.25, y1 + 0.4};
}

std::vector<LowLevelEvent> simulate_detections(const std::vector<GroundTruthAnnotation>& annotations,
                                               const NoiseConfig& noise, const ClassRegistry& registry) {
  noise.validate();
  for (const auto& [from, row] : noise.confusion) {
    for (const auto& [to, p] : row) {
      if (!registry.contains(to)) throw Error("confusion target '" + to.label() + "' not in class registry");
    }
  }
  auto anns = annotations;
  sort_annotations(anns);
  check_unique(anns);

  // Interior seconds of a true run are the ones eligible for split gaps.
  std::map<std::tuple<std::string, std::string, std::int64_t>, const GroundTruthAnnotation*> index;
  for (const auto& a : anns) index[{a.video_id, a.resource, a.t}] = &a;
  auto same_class_at = [&](const GroundTruthAnnotation& a, std::int64_t t) {
    auto it = index.find({a.video_id, a.resource, t});
    return it != index.end() && it->second->cls == a.cls && it->second->case_id == a.case_id;
  };

  const double top = registry.size() > 1 ? noise.score_sharpness / (noise.score_sharpness + 1.0) : 1.0;
  const double rest = registry.size() > 1 ? (1.0 - top) / static_cast<double>(registry.size() - 1) : 0.0;

  std::vector<LowLevelEvent> out;
  out.reserve(anns.size());
  std::mt19937_64 rng;
  std::string current_video;
  bool seeded = false;
  for (const auto& a : anns) {
    if (!seeded || a.video_id != current_video) {
      rng.seed(derive_sub_seed(noise.seed, a.video_id));
      current_video = a.video_id;
      seeded = true;
    }
    const double u_split = uniform01(rng);
    const double u_miss = uniform01(rng);
    const double u_conf = uniform01(rng);

    ActivityClass drawn = a.cls;
    const bool interior = same_class_at(a, a.t - 1) && same_class_at(a, a.t + 1);
    if (interior && u_split < noise.p_split) {
      drawn = undefined_class();
    } else if (u_miss < noise.p_miss) {
      drawn = undefined_class();
    } else if (auto row = noise.confusion.find(a.cls); row != noise.confusion.end() && !row->second.empty()) {
      double cum = 0.0;
      drawn = row->second.rbegin()->first;
      for (const auto& [to, p] : row->second) {
        cum += p;
        if (u_conf < cum) {
          drawn = to;
          break;
        }
      }
    }

    LowLevelEvent e;
    e.video_id = a.video_id;
    e.t = a.t;
    e.resource = a.resource;
    e.bbox = resource_bbox(a.resource);
    for (const auto& cls : registry.classes()) e.scores[cls] = rest;
    e.scores[drawn] = top;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::vector<std::string>> synthetic_crepe_variants() {
  return {
      {"stir", "pour", "spread", "sprinkle", "fold", "transfer"},
      {"stir", "pour", "spread", "cut", "sprinkle", "fold", "transfer"},
      {"stir", "pour", "spread", "grate", "flip", "fold", "transfer"},
      {"stir", "pour", "spread", "grate", "cut", "sprinkle", "flip", "fold", "transfer"},
      {"stir", "pour", "spread", "cut", "flip", "fold", "transfer"},
      {"stir", "pour", "spread", "cut", "grate", "flip", "fold", "transfer"},
  };
}

std::vector<GroundTruthAnnotation> synthesize_annotations(const ScenarioConfig& cfg) {
  if (cfg.variants.empty()) throw Error("scenario needs at least one variant");
  if (cfg.min_activity_s < 1 || cfg.max_activity_s < cfg.min_activity_s || cfg.max_gap_s < 0) {
    throw Error("invalid scenario durations");
  }
  std::mt19937_64 rng(cfg.seed);
  auto draw = [&](std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(uniform01(rng) * static_cast<double>(hi - lo + 1));
  };

  std::vector<GroundTruthAnnotation> out;
  auto emit = [&](const std::string& res, std::int64_t t, const std::string& case_id, const std::string& label) {
    out.push_back({cfg.video_id, t, res, case_id, ActivityClass{label}});
  };

  for (int r = 1; r <= cfg.resources; ++r) {
    const std::string res = "r" + std::to_string(r);
    std::int64_t t = draw(0, 3);
    for (std::int64_t s = 0; s < t; ++s) emit(res, s, "", std::string(kUndefinedLabel));
    int k = 0;
    while (true) {
      const auto& variant = cfg.variants[static_cast<std::size_t>(draw(0, static_cast<std::int64_t>(cfg.variants.size()) - 1))];
      std::vector<std::pair<std::int64_t, std::int64_t>> plan;  // (gap before, duration)
      std::int64_t need = 0;
      for (std::size_t i = 0; i < variant.size(); ++i) {
        std::int64_t gap = i == 0 ? 0 : draw(0, cfg.max_gap_s);
        std::int64_t dur = draw(cfg.min_activity_s, cfg.max_activity_s);
        plan.emplace_back(gap, dur);
        need += gap + dur;
      }
      if (t + need > cfg.duration_s) break;
      ++k;
      const std::string case_id = res + "_c" + std::to_string(k);
      for (std::size_t i = 0; i < variant.size(); ++i) {
        for (std::int64_t g = 0; g < plan[i].first; ++g) emit(res, t++, "", std::string(kUndefinedLabel));
        for (std::int64_t d = 0; d < plan[i].second; ++d) emit(res, t++, case_id, variant[i]);
      }
      std::int64_t pause = draw(1, cfg.max_gap_s + 1);
      for (std::int64_t g = 0; g < pause && t < cfg.duration_s; ++g) emit(res, t++, "", std::string(kUndefinedLabel));
    }
    for (; t < cfg.duration_s; ++t) emit(res, t, "", std::string(kUndefinedLabel));
  }
  for (int w = 1; w <= cfg.idle_resources; ++w) {
    const std::string res = "w" + std::to_string(w);
    for (std::int64_t t = 0; t < cfg.duration_s; ++t) emit(res, t, "", std::string(kUndefinedLabel));
  }
  sort_annotations(out);
  return out;
}

}  // namespace vpm
