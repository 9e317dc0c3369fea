#include "vpm/event_aggregator.hpp"

#include <algorithm>

#include "vpm/error.hpp"

namespace vpm {

void AggregatorConfig::validate() const {
  if (!(selection_threshold >= 0.0 && selection_threshold <= 1.0)) {
    throw Error("selection threshold outside [0,1]");
  }
  if (merge_gap_ms < 0) throw Error("merge gap must be non-negative");
}

SelectedClasses select_classes(const std::vector<LowLevelEvent>& stream, double threshold) {
  SelectedClasses out;
  for (const auto& e : stream) {
    const ActivityClass* best = nullptr;
    double best_score = -1.0;
    for (const auto& [cls, score] : e.scores) {
      if (score > best_score) {
        best = &cls;
        best_score = score;
      }
    }
    ActivityClass chosen = (best && best_score >= threshold) ? *best : undefined_class();
    out.emplace(SecondKey{e.video_id, e.resource, e.t}, std::move(chosen));
  }
  return out;
}

std::vector<ActivityInstance> segment_instances(const SelectedClasses& selected,
                                                const std::set<ActivityClass>& drop_classes) {
  std::vector<ActivityInstance> out;
  auto it = selected.begin();
  while (it != selected.end()) {
    auto run_end = std::next(it);
    auto last = it;
    while (run_end != selected.end() && run_end->first.video_id == it->first.video_id &&
           run_end->first.resource == it->first.resource && run_end->first.t == last->first.t + 1 &&
           run_end->second == it->second) {
      last = run_end;
      ++run_end;
    }
    if (!drop_classes.count(it->second)) {
      out.push_back({it->second, it->first.resource, it->first.t * kMillisPerSecond,
                     (last->first.t + 1) * kMillisPerSecond, std::nullopt});
    }
    it = run_end;
  }
  sort_instances(out);
  return out;
}

std::vector<ActivityInstance> merge_adjacent(std::vector<ActivityInstance> instances, std::int64_t gap_ms) {
  if (gap_ms < 0) throw Error("merge gap must be non-negative");
  std::stable_sort(instances.begin(), instances.end(), [](const auto& a, const auto& b) {
    return std::tie(a.resource, a.start_ms, a.complete_ms) < std::tie(b.resource, b.start_ms, b.complete_ms);
  });
  std::vector<ActivityInstance> out;
  for (auto& inst : instances) {
    if (!out.empty()) {
      auto& prev = out.back();
      if (prev.resource == inst.resource && prev.cls == inst.cls && inst.start_ms - prev.complete_ms <= gap_ms) {
        prev.complete_ms = std::max(prev.complete_ms, inst.complete_ms);
        continue;
      }
    }
    out.push_back(std::move(inst));
  }
  sort_instances(out);
  return out;
}

Trace merge_subsequent_in_trace(const Trace& trace) {
  auto instances = events_to_instances(trace);
  std::vector<ActivityInstance> merged;
  std::map<std::string, std::size_t> last_of_resource;
  for (auto& inst : instances) {
    auto it = last_of_resource.find(inst.resource);
    if (it != last_of_resource.end() && merged[it->second].cls == inst.cls) {
      auto& prev = merged[it->second];
      prev.start_ms = std::min(prev.start_ms, inst.start_ms);
      prev.complete_ms = std::max(prev.complete_ms, inst.complete_ms);
      continue;
    }
    last_of_resource[inst.resource] = merged.size();
    merged.push_back(std::move(inst));
  }
  Trace out;
  out.case_id = trace.case_id;
  out.attributes = trace.attributes;
  out.events = instances_to_events(merged);
  return out;
}

EventLog merge_subsequent(const EventLog& log) {
  EventLog out;
  out.log_attributes = log.log_attributes;
  out.class_registry = log.class_registry;
  for (const auto& t : log.traces) out.traces.push_back(merge_subsequent_in_trace(t));
  return out;
}

EventLog correlate_cases(std::vector<ActivityInstance> instances, const ActivityClass& case_marker,
                         const ClassRegistry& registry) {
  std::stable_sort(instances.begin(), instances.end(), [](const auto& a, const auto& b) {
    return std::tie(a.resource, a.start_ms, a.complete_ms, a.cls) < std::tie(b.resource, b.start_ms, b.complete_ms, b.cls);
  });
  std::map<std::string, std::vector<ActivityInstance>> cases;
  std::set<std::string> unassigned;
  std::string current_resource;
  std::string current_case;
  int k = 0;
  EventLog log;
  log.class_registry = registry;
  for (auto& inst : instances) {
    log.class_registry.add(inst.cls);
    if (inst.resource != current_resource) {
      current_resource = inst.resource;
      current_case.clear();
      k = 0;
    }
    if (inst.cls == case_marker) {
      current_case = inst.resource + "#" + std::to_string(++k);
    } else if (current_case.empty()) {
      current_case = inst.resource + "#" + std::string(kUnassignedAttribute);
      unassigned.insert(current_case);
    }
    inst.case_id = current_case;
    cases[current_case].push_back(std::move(inst));
  }
  for (auto& [id, insts] : cases) {
    Trace t;
    t.case_id = id;
    t.events = instances_to_events(insts);
    if (unassigned.count(id)) t.attributes[std::string(kUnassignedAttribute)] = true;
    log.traces.push_back(std::move(t));
  }
  return log;
}

EventLog default_trace_log(std::vector<ActivityInstance> instances, const ClassRegistry& registry) {
  EventLog log;
  log.class_registry = registry;
  if (instances.empty()) return log;
  for (auto& inst : instances) {
    inst.case_id = std::string(kDefaultTraceId);
    log.class_registry.add(inst.cls);
  }
  Trace t;
  t.case_id = std::string(kDefaultTraceId);
  t.events = instances_to_events(instances);
  log.traces.push_back(std::move(t));
  return log;
}

EventLog filter_class(const EventLog& log, const ActivityClass& cls) {
  EventLog out;
  out.log_attributes = log.log_attributes;
  out.class_registry = log.class_registry;
  for (const auto& t : log.traces) {
    Trace kept;
    kept.case_id = t.case_id;
    kept.attributes = t.attributes;
    for (const auto& e : t.events) {
      if (e.cls != cls) kept.events.push_back(e);
    }
    if (!kept.events.empty()) out.traces.push_back(std::move(kept));
  }
  return out;
}

std::vector<ActivityInstance> aggregate_instances(const std::vector<LowLevelEvent>& stream,
                                                  const AggregatorConfig& config) {
  config.validate();
  auto validated = validate_low_level_stream(stream);
  auto selected = select_classes(validated, config.selection_threshold);
  auto segments = segment_instances(selected, config.drop_classes);
  return merge_adjacent(std::move(segments), config.merge_gap_ms);
}

}  // namespace vpm
