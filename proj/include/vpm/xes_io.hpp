#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "vpm/event_model.hpp"

namespace vpm {

// Milliseconds since 1970-01-01T00:00:00Z rendered as
// YYYY-MM-DDTHH:MM:SS.mmmZ.
std::string format_timestamp(std::int64_t unix_ms);

// Accepts an optional fraction and either `Z`, a `+hh:mm`/`-hh:mm` offset, or
// no designator (read as UTC). Throws ParseError.
std::int64_t parse_timestamp(std::string_view text);

inline constexpr std::string_view kEpochAttribute = "vpm:epoch";
inline constexpr std::string_view kRegistryAttribute = "vpm:class_registry";

// Deterministic XES serialization. Traces are written in case-id order,
// events in trace order, attributes in key order.
std::string export_xes(const EventLog& log, std::int64_t epoch_unix_ms = 0);

struct ImportedLog {
  EventLog log;
  // Absolute time of offset 0.
  std::int64_t epoch_unix_ms = 0;
};

// Offsets are relative to the log's `vpm:epoch` attribute when present,
// otherwise to the earliest event. Throws ParseError on malformed XML and
// SchemaError naming the first missing mandatory attribute.
ImportedLog import_xes(std::string_view xml);
ImportedLog import_xes_file(const std::string& path);

// Throws SchemaError unless every trace has concept:name and every event has
// concept:name, time:timestamp, lifecycle:transition (start|complete) and
// org:resource.
void check_xes_schema(std::string_view xml);

}  // namespace vpm
