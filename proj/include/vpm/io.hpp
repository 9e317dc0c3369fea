#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "vpm/detector_sim.hpp"
#include "vpm/event_model.hpp"

namespace vpm {

// One JSON object per line with sorted keys: bbox (optional), resource,
// scores, t, video_id.
std::string low_level_to_jsonl(const std::vector<LowLevelEvent>& events);
// Throws ParseError with the offending line, then validates the stream.
std::vector<LowLevelEvent> parse_low_level_jsonl(std::istream& in);
std::vector<LowLevelEvent> load_low_level_file(const std::string& path);

// Keys: case_id (null when absent), class, complete_ms, resource, start_ms.
std::string instances_to_jsonl(const std::vector<ActivityInstance>& instances);
std::vector<ActivityInstance> parse_instances_jsonl(std::istream& in);
std::vector<ActivityInstance> load_instances_file(const std::string& path);

// Seed, generator and noise parameters of a simulation run.
std::string simulation_metadata_json(const NoiseConfig& noise, const std::string& annotations_hash);

std::string read_file(const std::string& path);
// Writes to a temporary sibling and renames it over `path`. Creates missing
// parent directories.
void write_file_atomic(const std::string& path, std::string_view content);

// FNV-1a 64 as 16 lowercase hex digits.
std::string content_hash(std::string_view bytes);

}  // namespace vpm
