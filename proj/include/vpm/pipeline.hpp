#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpm/alignment.hpp"
#include "vpm/detector_sim.hpp"
#include "vpm/event_aggregator.hpp"
#include "vpm/log_eval.hpp"
#include "vpm/petri_net.hpp"
#include "vpm/precision.hpp"
#include "vpm/process_tree.hpp"

namespace vpm {

// Invalid or inconsistent configuration. Not a domain error: the CLI exits
// with status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  std::string annotations_path;
  std::string low_level_path;
  // Reference model: a variant spec or a PNML file. Both empty skips the
  // reference conformance check.
  std::string model_spec_path;
  std::string model_pnml_path;
  std::string out_dir = "out";

  AggregatorConfig aggregator;
  NoiseConfig noise;
  double imf_threshold = 0.2;
  std::size_t state_budget = kDefaultStateBudget;
  FitnessAggregation fitness_aggregation = FitnessAggregation::cost_sum;
  std::int64_t epoch_unix_ms = 0;
  // Evaluation restricted to these resources when non-empty.
  std::set<std::string> resources;
  // Class registry labels; empty means the crepe classes.
  std::vector<std::string> classes;

  ClassRegistry registry() const;
  // Throws ConfigError. With `check_paths`, referenced inputs must exist.
  void validate(bool check_paths = true) const;
};

// JSON document; unknown keys are rejected. Throws ConfigError.
PipelineConfig parse_pipeline_config(const std::string& json_text);
PipelineConfig load_pipeline_config(const std::string& path);

NoiseConfig parse_noise_config(const std::string& json_text);

struct ConformanceResult {
  FitnessReport fitness;
  std::optional<PrecisionReport> precision;
};

struct DiscoveryResult {
  ProcessTree tree;
  PetriNet net;
  FitnessReport fitness;
  PrecisionReport precision;

  std::string to_json() const;
};

struct PipelineResult {
  std::vector<GroundTruthAnnotation> annotations;
  std::vector<LowLevelEvent> stream;
  std::vector<ActivityInstance> instances;  // aggregated, before correlation
  EventLog true_log;
  EventLog extracted_log;  // correlated, as exported
  EventLog merged_log;     // after the trace-level merge
  std::vector<MatchRecord> matches;
  ConfusionMatrix confusion{{}};
  Metrics metrics;
  std::optional<PetriNet> reference_model;
  std::optional<ConformanceResult> true_conformance;
  std::optional<ConformanceResult> extracted_conformance;
  DiscoveryResult discovery;
};

// Traces flagged unassigned are left out of conformance and discovery.
std::vector<LabelSequence> process_sequences(const EventLog& log);

// Stage helpers shared by the CLI subcommands.
std::vector<MatchRecord> evaluate_logs(const EventLog& true_log, const EventLog& extracted_log,
                                       const std::set<std::string>& resources);
ConformanceResult check_conformance(const EventLog& log, const PetriNet& net, const AlignOptions& options,
                                    FitnessAggregation aggregation);
std::string conformance_json(const ConformanceResult& result);
DiscoveryResult discover(const EventLog& log, double threshold, const AlignOptions& options);
PetriNet load_reference_model(const PipelineConfig& config);

// Runs every stage in memory on the given annotations. The first failing
// stage throws.
PipelineResult run_pipeline(const PipelineConfig& config, std::vector<GroundTruthAnnotation> annotations);
PipelineResult run_pipeline(const PipelineConfig& config);

// File name -> content for every artifact of a run, manifest included.
std::map<std::string, std::string> pipeline_artifacts(const PipelineConfig& config, const PipelineResult& result,
                                                      const std::map<std::string, std::string>& input_hashes = {});

// Writes all artifacts under config.out_dir. On failure the files already
// written are removed.
void write_artifacts(const std::string& out_dir, const std::map<std::string, std::string>& artifacts);

inline constexpr const char* kVersion = "1.0.0";

}  // namespace vpm
