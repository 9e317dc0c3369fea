#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "vpm/event_model.hpp"

namespace vpm {

struct AggregatorConfig {
  // Minimum top score; below it a second is classed "undefined".
  double selection_threshold = 0.0;
  // Largest gap between same-class instances of one resource that still merge.
  std::int64_t merge_gap_ms = 0;
  ActivityClass case_marker{"stir"};
  std::set<ActivityClass> drop_classes{undefined_class()};

  void validate() const;
};

// One second of one actor in one video.
struct SecondKey {
  std::string video_id;
  std::string resource;
  std::int64_t t = 0;

  friend auto operator<=>(const SecondKey&, const SecondKey&) = default;
};

using SelectedClasses = std::map<SecondKey, ActivityClass>;

inline constexpr std::string_view kDefaultTraceId = "default";
inline constexpr std::string_view kUnassignedAttribute = "unassigned";

// Arg-max class per record (ties: smallest label) if its score reaches the
// threshold, else "undefined".
SelectedClasses select_classes(const std::vector<LowLevelEvent>& stream, double threshold);

// Maximal runs of consecutive seconds with an identical class, per video and
// resource. Runs of `drop_classes` are left out.
std::vector<ActivityInstance> segment_instances(const SelectedClasses& selected,
                                                const std::set<ActivityClass>& drop_classes = {undefined_class()});

// Merges consecutive same-class instances of one resource whose gap is at
// most `gap_ms`. Idempotent.
std::vector<ActivityInstance> merge_adjacent(std::vector<ActivityInstance> instances, std::int64_t gap_ms);

// Trace-order merge: consecutive instances of the same class by the same
// resource collapse into one, whatever the time gap between them.
Trace merge_subsequent_in_trace(const Trace& trace);
EventLog merge_subsequent(const EventLog& log);

// A new case opens at each marker instance of a resource. Instances before a
// resource's first marker land in a trace flagged `unassigned=true`.
EventLog correlate_cases(std::vector<ActivityInstance> instances, const ActivityClass& case_marker,
                         const ClassRegistry& registry = ClassRegistry::crepe());

// All instances in one trace named "default".
EventLog default_trace_log(std::vector<ActivityInstance> instances,
                           const ClassRegistry& registry = ClassRegistry::crepe());

// Removes both lifecycle events of every instance of `cls`, then empty traces.
EventLog filter_class(const EventLog& log, const ActivityClass& cls);

// select -> segment -> merge_adjacent. Validates the stream first.
std::vector<ActivityInstance> aggregate_instances(const std::vector<LowLevelEvent>& stream,
                                                  const AggregatorConfig& config);

}  // namespace vpm
