#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vpm {

inline constexpr std::string_view kUndefinedLabel = "undefined";

// Label of a business activity. Default-constructed classes are "undefined".
class ActivityClass {
 public:
  ActivityClass() : label_(kUndefinedLabel) {}
  explicit ActivityClass(std::string label);

  const std::string& label() const { return label_; }
  bool is_undefined() const { return label_ == kUndefinedLabel; }

  friend auto operator<=>(const ActivityClass&, const ActivityClass&) = default;
  friend bool operator==(const ActivityClass&, const ActivityClass&) = default;

 private:
  std::string label_;
};

inline ActivityClass undefined_class() { return ActivityClass{}; }

// Set of known activity classes. "undefined" is always a member.
class ClassRegistry {
 public:
  ClassRegistry() { classes_.insert(undefined_class()); }
  explicit ClassRegistry(const std::vector<std::string>& labels);

  // The nine crepe preparation classes plus "undefined".
  static ClassRegistry crepe();

  void add(const ActivityClass& cls) { classes_.insert(cls); }
  bool contains(const ActivityClass& cls) const { return classes_.count(cls) > 0; }
  bool contains(std::string_view label) const;
  std::size_t size() const { return classes_.size(); }
  const std::set<ActivityClass>& classes() const { return classes_; }
  std::vector<std::string> labels() const;

  friend bool operator==(const ClassRegistry&, const ClassRegistry&) = default;

 private:
  std::set<ActivityClass> classes_;
};

struct BBox {
  double x1 = 0, y1 = 0, x2 = 1, y2 = 1;
  friend bool operator==(const BBox&, const BBox&) = default;
};

// Output record of the detector for one actor in one second [t, t+1).
struct LowLevelEvent {
  std::string video_id;
  std::int64_t t = 0;
  std::string resource;
  std::optional<BBox> bbox;
  std::map<ActivityClass, double> scores;

  friend bool operator==(const LowLevelEvent&, const LowLevelEvent&) = default;
};

struct ActivityInstance {
  ActivityClass cls;
  std::string resource;
  std::int64_t start_ms = 0;
  std::int64_t complete_ms = 0;
  std::optional<std::string> case_id;

  friend bool operator==(const ActivityInstance&, const ActivityInstance&) = default;
};

enum class Lifecycle { start, complete };

std::string_view to_string(Lifecycle lc);
std::optional<Lifecycle> parse_lifecycle(std::string_view s);

using Scalar = std::variant<std::string, std::int64_t, double, bool>;
using AttributeMap = std::map<std::string, Scalar>;

struct HighLevelEvent {
  ActivityClass cls;
  Lifecycle lifecycle = Lifecycle::start;
  std::int64_t timestamp_ms = 0;
  std::string resource;
  std::optional<std::string> case_id;
  AttributeMap attributes;

  friend bool operator==(const HighLevelEvent&, const HighLevelEvent&) = default;
};

// Canonical order: timestamp, start before complete, class label, resource.
bool event_order_less(const HighLevelEvent& a, const HighLevelEvent& b);
void sort_events(std::vector<HighLevelEvent>& events);

struct Trace {
  std::string case_id;
  std::vector<HighLevelEvent> events;
  AttributeMap attributes;

  friend bool operator==(const Trace&, const Trace&) = default;
};

struct EventLog {
  std::vector<Trace> traces;
  AttributeMap log_attributes;
  ClassRegistry class_registry;

  std::size_t event_count() const;
  friend bool operator==(const EventLog&, const EventLog&) = default;
};

struct GroundTruthAnnotation {
  std::string video_id;
  std::int64_t t = 0;
  std::string resource;
  std::string case_id;
  ActivityClass cls;

  friend bool operator==(const GroundTruthAnnotation&, const GroundTruthAnnotation&) = default;
};

inline constexpr std::int64_t kMillisPerSecond = 1000;

// Throws ScoreOutOfRange / MalformedBBox / DuplicateKey. Returns the stream
// sorted by (video_id, t, resource).
std::vector<LowLevelEvent> validate_low_level_stream(std::vector<LowLevelEvent> events);

// Throws InvalidInstance when start_ms >= complete_ms or the resource is empty.
void validate_instance(const ActivityInstance& inst);

// One start and one complete event per instance, in canonical order.
std::vector<HighLevelEvent> instances_to_events(std::span<const ActivityInstance> instances);

// Pairs every start with the earliest unmatched complete of the same class
// and resource. Instances come back in the order of their start events.
std::vector<ActivityInstance> events_to_instances(const Trace& trace);

// Instances of all traces, trace by trace.
std::vector<ActivityInstance> log_instances(const EventLog& log);

// Instances sorted by (start_ms, class, resource, complete_ms).
void sort_instances(std::vector<ActivityInstance>& instances);

}  // namespace vpm
