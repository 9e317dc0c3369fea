#include "vpm/event_model.hpp"

#include <algorithm>
#include <deque>
#include <tuple>

#include "vpm/error.hpp"

namespace vpm {

ActivityClass::ActivityClass(std::string label) : label_(std::move(label)) {
  if (label_.empty()) {
    throw Error("activity class label must not be empty");
  }
}

ClassRegistry::ClassRegistry(const std::vector<std::string>& labels) : ClassRegistry() {
  for (const auto& l : labels) classes_.insert(ActivityClass{l});
}

ClassRegistry ClassRegistry::crepe() {
  return ClassRegistry({"cut", "flip", "fold", "grate", "pour", "spread", "sprinkle", "stir", "transfer"});
}

bool ClassRegistry::contains(std::string_view label) const {
  return std::any_of(classes_.begin(), classes_.end(),
                     [&](const ActivityClass& c) { return c.label() == label; });
}

std::vector<std::string> ClassRegistry::labels() const {
  std::vector<std::string> out;
  out.reserve(classes_.size());
  for (const auto& c : classes_) out.push_back(c.label());
  return out;
}

std::string_view to_string(Lifecycle lc) {
  return lc == Lifecycle::start ? "start" : "complete";
}

std::optional<Lifecycle> parse_lifecycle(std::string_view s) {
  if (s == "start") return Lifecycle::start;
  if (s == "complete") return Lifecycle::complete;
  return std::nullopt;
}

bool event_order_less(const HighLevelEvent& a, const HighLevelEvent& b) {
  return std::tie(a.timestamp_ms, a.lifecycle, a.cls, a.resource) <
         std::tie(b.timestamp_ms, b.lifecycle, b.cls, b.resource);
}

void sort_events(std::vector<HighLevelEvent>& events) {
  std::stable_sort(events.begin(), events.end(), event_order_less);
}

std::size_t EventLog::event_count() const {
  std::size_t n = 0;
  for (const auto& t : traces) n += t.events.size();
  return n;
}

namespace {

std::string key_text(const LowLevelEvent& e) {
  return "(" + e.video_id + ", " + std::to_string(e.t) + ", " + e.resource + ")";
}

}  // namespace

std::vector<LowLevelEvent> validate_low_level_stream(std::vector<LowLevelEvent> events) {
  for (const auto& e : events) {
    if (e.t < 0) throw Error("negative second index at " + key_text(e));
    if (e.scores.empty()) throw ScoreOutOfRange("empty score vector at " + key_text(e));
    for (const auto& [cls, s] : e.scores) {
      if (!(s >= 0.0 && s <= 1.0)) {
        throw ScoreOutOfRange("score for '" + cls.label() + "' outside [0,1] at " + key_text(e));
      }
    }
    if (e.bbox) {
      const auto& b = *e.bbox;
      bool ok = 0.0 <= b.x1 && b.x1 < b.x2 && b.x2 <= 1.0 && 0.0 <= b.y1 && b.y1 < b.y2 && b.y2 <= 1.0;
      if (!ok) throw MalformedBBox("malformed bounding box at " + key_text(e));
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const LowLevelEvent& a, const LowLevelEvent& b) {
    return std::tie(a.video_id, a.t, a.resource) < std::tie(b.video_id, b.t, b.resource);
  });
  for (std::size_t i = 1; i < events.size(); ++i) {
    const auto& a = events[i - 1];
    const auto& b = events[i];
    if (a.video_id == b.video_id && a.t == b.t && a.resource == b.resource) {
      throw DuplicateKey("duplicate low-level event " + key_text(b));
    }
  }
  return events;
}

void validate_instance(const ActivityInstance& inst) {
  if (inst.start_ms >= inst.complete_ms) {
    throw InvalidInstance("instance of '" + inst.cls.label() + "' has start_ms " +
                          std::to_string(inst.start_ms) + " >= complete_ms " +
                          std::to_string(inst.complete_ms));
  }
  if (inst.resource.empty()) throw InvalidInstance("instance without resource");
}

std::vector<HighLevelEvent> instances_to_events(std::span<const ActivityInstance> instances) {
  std::vector<HighLevelEvent> events;
  events.reserve(instances.size() * 2);
  for (const auto& inst : instances) {
    validate_instance(inst);
    events.push_back({inst.cls, Lifecycle::start, inst.start_ms, inst.resource, inst.case_id, {}});
    events.push_back({inst.cls, Lifecycle::complete, inst.complete_ms, inst.resource, inst.case_id, {}});
  }
  sort_events(events);
  return events;
}

std::vector<ActivityInstance> events_to_instances(const Trace& trace) {
  std::vector<ActivityInstance> out;
  std::map<std::pair<ActivityClass, std::string>, std::deque<std::size_t>> open;
  std::vector<bool> closed;
  for (const auto& e : trace.events) {
    auto key = std::make_pair(e.cls, e.resource);
    if (e.lifecycle == Lifecycle::start) {
      open[key].push_back(out.size());
      out.push_back({e.cls, e.resource, e.timestamp_ms, e.timestamp_ms, e.case_id});
      closed.push_back(false);
      continue;
    }
    auto it = open.find(key);
    if (it == open.end() || it->second.empty()) {
      throw UnbalancedLifecycle("complete of '" + e.cls.label() + "' by '" + e.resource +
                                "' at " + std::to_string(e.timestamp_ms) +
                                " ms without matching start in trace '" + trace.case_id + "'");
    }
    std::size_t idx = it->second.front();
    it->second.pop_front();
    out[idx].complete_ms = e.timestamp_ms;
    closed[idx] = true;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!closed[i]) {
      throw UnbalancedLifecycle("start of '" + out[i].cls.label() + "' by '" + out[i].resource +
                                "' at " + std::to_string(out[i].start_ms) +
                                " ms has no complete in trace '" + trace.case_id + "'");
    }
  }
  return out;
}

std::vector<ActivityInstance> log_instances(const EventLog& log) {
  std::vector<ActivityInstance> out;
  for (const auto& t : log.traces) {
    auto part = events_to_instances(t);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

void sort_instances(std::vector<ActivityInstance>& instances) {
  std::stable_sort(instances.begin(), instances.end(), [](const ActivityInstance& a, const ActivityInstance& b) {
    return std::tie(a.start_ms, a.cls, a.resource, a.complete_ms) <
           std::tie(b.start_ms, b.cls, b.resource, b.complete_ms);
  });
}

}  // namespace vpm
