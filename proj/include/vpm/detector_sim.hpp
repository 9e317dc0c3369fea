#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "vpm/event_model.hpp"

namespace vpm {

// Knobs of the per-second noise model applied to ground truth.
struct NoiseConfig {
  double p_miss = 0.0;
  // true class -> (detected class -> probability). Missing rows mean identity.
  std::map<ActivityClass, std::map<ActivityClass, double>> confusion;
  double p_split = 0.0;
  double score_sharpness = 4.0;
  std::uint64_t seed = 0;

  // Throws Error on probabilities outside [0,1], rows not summing to 1 within
  // 1e-9, or sharpness <= 0.
  void validate() const;
};

inline constexpr std::string_view kGeneratorName = "mt19937_64";

// Sub-seed for one video: FNV-1a 64 over the 8 little-endian bytes of `seed`
// followed by the bytes of `video_id`.
std::uint64_t derive_sub_seed(std::uint64_t seed, std::string_view video_id);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);

// Uniform double in [0,1) from the top 53 bits of one generator output.
double uniform01(std::mt19937_64& rng);

// Reads the `video_id,t,resource,case_id,class` CSV. With `strict` set,
// labels outside the registry are a ParseError. Rows of classes other than
// "undefined" must carry a case id.
std::vector<GroundTruthAnnotation> load_annotations(std::istream& in, const ClassRegistry* strict = nullptr);
std::vector<GroundTruthAnnotation> load_annotations_file(const std::string& path,
                                                         const ClassRegistry* strict = nullptr);
void write_annotations_csv(std::ostream& out, const std::vector<GroundTruthAnnotation>& annotations);

// Maximal same-class runs per (video, resource, case) become instances;
// "undefined" runs are removed; one trace per case id.
EventLog annotations_to_true_log(const std::vector<GroundTruthAnnotation>& annotations,
                                 const ClassRegistry& registry = ClassRegistry::crepe());

// One low-level event per annotation. The score vector covers every class of
// `registry`: the drawn class gets sharpness/(sharpness+1), the rest share
// the remainder evenly.
std::vector<LowLevelEvent> simulate_detections(const std::vector<GroundTruthAnnotation>& annotations,
                                               const NoiseConfig& noise,
                                               const ClassRegistry& registry = ClassRegistry::crepe());

// Fixed per-resource rectangle derived from the resource name.
BBox resource_bbox(std::string_view resource);

// Synthetic crepe-like scenario used by tests, the desk-scale benchmark and
// the sample data tool.
struct ScenarioConfig {
  // Activity sequences; each must start with the case marker and mention it
  // nowhere else.
  std::vector<std::vector<std::string>> variants;
  int resources = 3;
  // Resources that only ever do process-unrelated work.
  int idle_resources = 0;
  std::int64_t duration_s = 600;
  std::string video_id = "v1";
  std::int64_t min_activity_s = 2;
  std::int64_t max_activity_s = 12;
  // Undefined seconds between activities of one case, drawn from [0, max].
  std::int64_t max_gap_s = 2;
  std::uint64_t seed = 1;
};

std::vector<GroundTruthAnnotation> synthesize_annotations(const ScenarioConfig& cfg);

// Six illustrative crepe recipes over the nine crepe classes. Synthetic.
std::vector<std::vector<std::string>> synthetic_crepe_variants();

}  // namespace vpm
