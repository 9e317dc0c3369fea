#include "vpm/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vpm/discovery.hpp"
#include "vpm/error.hpp"
#include "vpm/io.hpp"
#include "vpm/xes_io.hpp"

namespace vpm {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

ClassRegistry PipelineConfig::registry() const {
  if (classes.empty()) return ClassRegistry::crepe();
  return ClassRegistry(classes);
}

void PipelineConfig::validate(bool check_paths) const {
  try {
    aggregator.validate();
    noise.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!(imf_threshold >= 0.0 && imf_threshold <= 1.0)) throw ConfigError("imf_threshold must lie in [0,1]");
  if (state_budget == 0) throw ConfigError("state_budget must be positive");
  if (!model_spec_path.empty() && !model_pnml_path.empty()) {
    throw ConfigError("give either model_spec or model_pnml, not both");
  }
  if (check_paths) {
    for (const auto* p : {&annotations_path, &low_level_path, &model_spec_path, &model_pnml_path}) {
      if (!p->empty() && !std::filesystem::is_regular_file(*p)) throw ConfigError("input file '" + *p + "' does not exist");
    }
  }
}

namespace {

const json& expect(const json& j, const char* key, json::value_t type) {
  const json& v = j.at(key);
  bool ok = v.type() == type || (type == json::value_t::number_float && v.is_number()) ||
            (type == json::value_t::number_unsigned && v.is_number_integer() && v.get<std::int64_t>() >= 0) ||
            (type == json::value_t::number_integer && v.is_number_integer());
  if (!ok) throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  return v;
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || k == a;
    if (!known) throw ConfigError("unknown config key '" + k + "' in " + where);
  }
}

ActivityClass config_class(const std::string& label) {
  if (label.empty()) throw ConfigError("empty class label in config");
  return ActivityClass(label);
}

NoiseConfig noise_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("noise section must be an object");
  reject_unknown(j, {"p_miss", "p_split", "score_sharpness", "seed", "confusion"}, "noise");
  NoiseConfig n;
  if (j.contains("p_miss")) n.p_miss = expect(j, "p_miss", json::value_t::number_float).get<double>();
  if (j.contains("p_split")) n.p_split = expect(j, "p_split", json::value_t::number_float).get<double>();
  if (j.contains("score_sharpness")) {
    n.score_sharpness = expect(j, "score_sharpness", json::value_t::number_float).get<double>();
  }
  if (j.contains("seed")) n.seed = expect(j, "seed", json::value_t::number_unsigned).get<std::uint64_t>();
  if (j.contains("confusion")) {
    const json& c = expect(j, "confusion", json::value_t::object);
    for (const auto& [from, row] : c.items()) {
      if (!row.is_object()) throw ConfigError("confusion row '" + from + "' must be an object");
      auto& r = n.confusion[config_class(from)];
      for (const auto& [to, p] : row.items()) {
        if (!p.is_number()) throw ConfigError("confusion probability must be a number");
        r[config_class(to)] = p.get<double>();
      }
    }
  }
  return n;
}

AggregatorConfig aggregator_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("aggregator section must be an object");
  reject_unknown(j, {"theta", "merge_gap_ms", "case_marker", "drop_classes"}, "aggregator");
  AggregatorConfig a;
  if (j.contains("theta")) a.selection_threshold = expect(j, "theta", json::value_t::number_float).get<double>();
  if (j.contains("merge_gap_ms")) a.merge_gap_ms = expect(j, "merge_gap_ms", json::value_t::number_integer).get<std::int64_t>();
  if (j.contains("case_marker")) a.case_marker = config_class(expect(j, "case_marker", json::value_t::string).get<std::string>());
  if (j.contains("drop_classes")) {
    a.drop_classes.clear();
    for (const auto& v : expect(j, "drop_classes", json::value_t::array)) {
      if (!v.is_string()) throw ConfigError("drop_classes must list strings");
      a.drop_classes.insert(config_class(v.get<std::string>()));
    }
  }
  return a;
}

std::vector<std::string> string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  for (const auto& v : expect(j, key, json::value_t::array)) {
    if (!v.is_string()) throw ConfigError(std::string("config key '") + key + "' must list strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

NoiseConfig parse_noise_config(const std::string& json_text) { return noise_from_json(parse_json(json_text)); }

PipelineConfig parse_pipeline_config(const std::string& json_text) {
  json j = parse_json(json_text);
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"annotations", "low_level", "model_spec", "model_pnml", "out_dir", "epoch", "aggregator", "noise",
                  "imf_threshold", "state_budget", "fitness_aggregation", "resources", "classes"},
                 "config");
  PipelineConfig c;
  auto str = [&](const char* key, std::string& dst) {
    if (j.contains(key)) dst = expect(j, key, json::value_t::string).get<std::string>();
  };
  str("annotations", c.annotations_path);
  str("low_level", c.low_level_path);
  str("model_spec", c.model_spec_path);
  str("model_pnml", c.model_pnml_path);
  str("out_dir", c.out_dir);
  if (j.contains("epoch")) {
    try {
      c.epoch_unix_ms = parse_timestamp(expect(j, "epoch", json::value_t::string).get<std::string>());
    } catch (const ParseError& e) {
      throw ConfigError(std::string("bad epoch: ") + e.what());
    }
  }
  if (j.contains("aggregator")) c.aggregator = aggregator_from_json(j["aggregator"]);
  if (j.contains("noise")) c.noise = noise_from_json(j["noise"]);
  if (j.contains("imf_threshold")) c.imf_threshold = expect(j, "imf_threshold", json::value_t::number_float).get<double>();
  if (j.contains("state_budget")) {
    c.state_budget = expect(j, "state_budget", json::value_t::number_unsigned).get<std::size_t>();
  }
  if (j.contains("fitness_aggregation")) {
    std::string s = expect(j, "fitness_aggregation", json::value_t::string).get<std::string>();
    if (s == "cost_sum") {
      c.fitness_aggregation = FitnessAggregation::cost_sum;
    } else if (s == "trace_average") {
      c.fitness_aggregation = FitnessAggregation::trace_average;
    } else {
      throw ConfigError("fitness_aggregation must be cost_sum or trace_average");
    }
  }
  if (j.contains("resources")) {
    auto r = string_list(j, "resources");
    c.resources = {r.begin(), r.end()};
  }
  if (j.contains("classes")) c.classes = string_list(j, "classes");
  return c;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  PipelineConfig c = parse_pipeline_config(buf.str());
  // Relative paths in the file are taken relative to the file itself.
  const auto base = std::filesystem::path(path).parent_path();
  for (auto* p : {&c.annotations_path, &c.low_level_path, &c.model_spec_path, &c.model_pnml_path, &c.out_dir}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  }
  return c;
}

std::vector<LabelSequence> process_sequences(const EventLog& log) {
  std::vector<LabelSequence> out;
  for (const auto& t : log.traces) {
    auto it = t.attributes.find(std::string(kUnassignedAttribute));
    if (it != t.attributes.end() && std::holds_alternative<bool>(it->second) && std::get<bool>(it->second)) continue;
    out.push_back(activity_sequence(t));
  }
  return out;
}

std::vector<MatchRecord> evaluate_logs(const EventLog& true_log, const EventLog& extracted_log,
                                       const std::set<std::string>& resources) {
  if (resources.empty()) return match_instances(true_log, extracted_log);
  auto [t, e] = filter_by_resources(true_log, extracted_log, resources);
  return match_instances(t, e);
}

ConformanceResult check_conformance(const EventLog& log, const PetriNet& net, const AlignOptions& options,
                                    FitnessAggregation aggregation) {
  ConformanceResult r;
  auto seqs = process_sequences(log);
  r.fitness = log_fitness(seqs, net, options, aggregation);
  if (!seqs.empty()) r.precision = etc_precision_report(seqs, net, options);
  return r;
}

std::string conformance_json(const ConformanceResult& result) {
  ojson j;
  j["fitness"] = ojson::parse(result.fitness.to_json());
  j["precision"] = result.precision ? ojson::parse(result.precision->to_json()) : ojson(nullptr);
  return j.dump(2) + "\n";
}

DiscoveryResult discover(const EventLog& log, double threshold, const AlignOptions& options) {
  auto seqs = process_sequences(log);
  DiscoveryResult r;
  r.tree = discover_imf(seqs, threshold);
  r.net = tree_to_net(r.tree);
  r.fitness = log_fitness(seqs, r.net, options);
  if (!seqs.empty()) r.precision = etc_precision_report(seqs, r.net, options);
  return r;
}

std::string DiscoveryResult::to_json() const {
  ojson j;
  j["tree"] = to_string(tree);
  j["places"] = net.places().size();
  j["transitions"] = net.transitions().size();
  j["fitness"] = fitness.fitness;
  j["precision"] = precision.precision;
  j["fitness_report"] = ojson::parse(fitness.to_json());
  j["precision_report"] = ojson::parse(precision.to_json());
  return j.dump(2) + "\n";
}

PetriNet load_reference_model(const PipelineConfig& config) {
  if (!config.model_spec_path.empty()) return build_model_from_variants(load_variant_spec_file(config.model_spec_path));
  return import_pnml_file(config.model_pnml_path);
}

namespace {

std::vector<std::string> axis_labels(const ClassRegistry& registry, const AggregatorConfig& agg) {
  std::vector<std::string> out;
  for (const auto& c : registry.classes()) {
    if (!agg.drop_classes.count(c)) out.push_back(c.label());
  }
  return out;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config, std::vector<GroundTruthAnnotation> annotations) {
  config.validate(false);
  const ClassRegistry registry = config.registry();
  const AlignOptions options{{}, config.state_budget};

  PipelineResult r;
  r.annotations = std::move(annotations);
  r.true_log = annotations_to_true_log(r.annotations, registry);
  r.stream = config.low_level_path.empty() ? simulate_detections(r.annotations, config.noise, registry)
                                           : load_low_level_file(config.low_level_path);
  r.instances = aggregate_instances(r.stream, config.aggregator);
  r.extracted_log = correlate_cases(r.instances, config.aggregator.case_marker, registry);
  r.merged_log = merge_subsequent(r.extracted_log);

  r.matches = evaluate_logs(r.true_log, r.merged_log, config.resources);
  r.confusion = build_confusion_matrix(r.matches, axis_labels(registry, config.aggregator));
  r.metrics = compute_metrics(r.confusion);

  if (!config.model_spec_path.empty() || !config.model_pnml_path.empty()) {
    r.reference_model = load_reference_model(config);
    r.true_conformance = check_conformance(r.true_log, *r.reference_model, options, config.fitness_aggregation);
    r.extracted_conformance = check_conformance(r.merged_log, *r.reference_model, options, config.fitness_aggregation);
  }
  r.discovery = discover(r.merged_log, config.imf_threshold, options);
  return r;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  config.validate(true);
  if (config.annotations_path.empty()) throw ConfigError("pipeline needs an annotations file");
  ClassRegistry registry = config.registry();
  return run_pipeline(config, load_annotations_file(config.annotations_path, &registry));
}

std::map<std::string, std::string> pipeline_artifacts(const PipelineConfig& config, const PipelineResult& result,
                                                      const std::map<std::string, std::string>& input_hashes) {
  std::map<std::string, std::string> a;
  std::ostringstream csv;
  write_annotations_csv(csv, result.annotations);
  const std::string annotations_hash = content_hash(csv.str());
  a["low_level.jsonl"] = low_level_to_jsonl(result.stream);
  a["low_level.meta.json"] = simulation_metadata_json(config.noise, annotations_hash);
  a["instances.jsonl"] = instances_to_jsonl(result.instances);
  a["true.xes"] = export_xes(result.true_log, config.epoch_unix_ms);
  a["extracted.xes"] = export_xes(result.extracted_log, config.epoch_unix_ms);
  a["extracted_merged.xes"] = export_xes(result.merged_log, config.epoch_unix_ms);
  a["confusion.csv"] = result.confusion.to_csv();
  a["confusion.json"] = result.confusion.to_json();
  a["metrics.json"] = result.metrics.to_json();
  if (result.reference_model) {
    a["reference.pnml"] = export_pnml(*result.reference_model);
    a["conformance_true.json"] = conformance_json(*result.true_conformance);
    a["conformance_extracted.json"] = conformance_json(*result.extracted_conformance);
  }
  a["discovered.pnml"] = export_pnml(result.discovery.net);
  a["discovered_tree.txt"] = to_string(result.discovery.tree) + "\n";
  a["discovery.json"] = result.discovery.to_json();

  ojson m;
  m["tool"] = "vpm";
  m["version"] = kVersion;
  m["generator"] = std::string(kGeneratorName);
  m["seed"] = config.noise.seed;
  ojson params;
  params["theta"] = config.aggregator.selection_threshold;
  params["merge_gap_ms"] = config.aggregator.merge_gap_ms;
  params["case_marker"] = config.aggregator.case_marker.label();
  params["imf_threshold"] = config.imf_threshold;
  params["state_budget"] = config.state_budget;
  params["fitness_aggregation"] =
      config.fitness_aggregation == FitnessAggregation::cost_sum ? "cost_sum" : "trace_average";
  params["epoch"] = format_timestamp(config.epoch_unix_ms);
  params["p_miss"] = config.noise.p_miss;
  params["p_split"] = config.noise.p_split;
  params["score_sharpness"] = config.noise.score_sharpness;
  m["parameters"] = params;
  ojson inputs = ojson::object();
  inputs["annotations"] = annotations_hash;
  for (const auto& [k, v] : input_hashes) inputs[k] = v;
  m["inputs"] = inputs;
  ojson outputs = ojson::object();
  for (const auto& [k, v] : a) outputs[k] = content_hash(v);
  m["outputs"] = outputs;
  a["manifest.json"] = m.dump(2) + "\n";
  return a;
}

void write_artifacts(const std::string& out_dir, const std::map<std::string, std::string>& artifacts) {
  std::vector<std::filesystem::path> written;
  try {
    for (const auto& [name, content] : artifacts) {
      auto path = std::filesystem::path(out_dir) / name;
      write_file_atomic(path.string(), content);
      written.push_back(path);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) std::filesystem::remove(p, ec);
    throw;
  }
}

}  // namespace vpm
