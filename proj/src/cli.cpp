#include "vpm/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vpm/discovery.hpp"
#include "vpm/error.hpp"
#include "vpm/io.hpp"
#include "vpm/notifier.hpp"
#include "vpm/pipeline.hpp"
#include "vpm/xes_io.hpp"

namespace vpm {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// Flags shared by every subcommand; set values override the config file.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<double> theta;
  std::optional<std::int64_t> merge_gap_ms;
  std::optional<double> imf_threshold;
  std::optional<std::size_t> state_budget;
  std::optional<std::string> epoch;
  std::optional<std::string> annotations;
  std::optional<std::string> model_spec;
  std::optional<std::string> model_pnml;
  std::optional<double> p_miss;
  std::optional<double> p_split;
  std::optional<std::string> resources;
  bool trace_average = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON configuration file");
  app->add_option("--seed", c.seed, "Simulator seed");
  app->add_option("--out-dir", c.out_dir, "Output directory");
  app->add_option("--theta", c.theta, "Class selection threshold");
  app->add_option("--merge-gap-ms", c.merge_gap_ms, "Largest gap merged by the aggregator");
  app->add_option("--imf-threshold", c.imf_threshold, "IMf noise threshold");
  app->add_option("--state-budget", c.state_budget, "Alignment search state budget");
  app->add_option("--epoch", c.epoch, "Absolute time of offset 0 (ISO 8601)");
  app->add_option("--annotations", c.annotations, "Ground-truth annotation CSV");
  app->add_option("--model-spec", c.model_spec, "Reference model as variant spec");
  app->add_option("--model-pnml", c.model_pnml, "Reference model as PNML");
  app->add_option("--p-miss", c.p_miss, "Per-second miss probability");
  app->add_option("--p-split", c.p_split, "Per-second split probability");
  app->add_option("--resources", c.resources, "Comma-separated resource filter");
  app->add_flag("--trace-average", c.trace_average, "Average per-trace fitness instead of the cost ratio");
}

PipelineConfig resolve(const Common& c) {
  PipelineConfig cfg = c.config.empty() ? PipelineConfig{} : load_pipeline_config(c.config);
  if (c.seed) cfg.noise.seed = *c.seed;
  if (c.out_dir) cfg.out_dir = *c.out_dir;
  if (c.theta) cfg.aggregator.selection_threshold = *c.theta;
  if (c.merge_gap_ms) cfg.aggregator.merge_gap_ms = *c.merge_gap_ms;
  if (c.imf_threshold) cfg.imf_threshold = *c.imf_threshold;
  if (c.state_budget) cfg.state_budget = *c.state_budget;
  if (c.epoch) {
    try {
      cfg.epoch_unix_ms = parse_timestamp(*c.epoch);
    } catch (const ParseError& e) {
      throw ConfigError(std::string("bad --epoch: ") + e.what());
    }
  }
  if (c.annotations) cfg.annotations_path = *c.annotations;
  if (c.model_spec) {
    cfg.model_spec_path = *c.model_spec;
    cfg.model_pnml_path.clear();
  }
  if (c.model_pnml) {
    cfg.model_pnml_path = *c.model_pnml;
    if (!c.model_spec) cfg.model_spec_path.clear();
  }
  if (c.p_miss) cfg.noise.p_miss = *c.p_miss;
  if (c.p_split) cfg.noise.p_split = *c.p_split;
  if (c.resources) {
    cfg.resources.clear();
    std::stringstream ss(*c.resources);
    std::string r;
    while (std::getline(ss, r, ',')) {
      if (!r.empty()) cfg.resources.insert(r);
    }
  }
  if (c.trace_average) cfg.fitness_aggregation = FitnessAggregation::trace_average;
  cfg.validate(true);
  return cfg;
}

std::string in_dir(const PipelineConfig& cfg, const std::string& explicit_path, const char* name) {
  if (!explicit_path.empty()) return explicit_path;
  return (fs::path(cfg.out_dir) / name).string();
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("missing ") + what);
  if (!fs::is_regular_file(path)) throw ConfigError(std::string(what) + " '" + path + "' does not exist");
}

std::string sidecar_path(const std::string& out) {
  fs::path p(out);
  return (p.parent_path() / (p.stem().string() + ".meta.json")).string();
}

std::vector<std::string> axis_labels(const PipelineConfig& cfg) {
  std::vector<std::string> out;
  const ClassRegistry registry = cfg.registry();
  for (const auto& c : registry.classes()) {
    if (!cfg.aggregator.drop_classes.count(c)) out.push_back(c.label());
  }
  return out;
}

void summary(std::ostream& out, const std::string& command, ojson fields) {
  ojson j;
  j["command"] = command;
  j["status"] = "ok";
  for (auto& [k, v] : fields.items()) j[k] = v;
  out << j.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Video-based process mining: detections to event logs, evaluation, conformance, discovery", "vpm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  std::string out_path, in_path, true_path, extracted_path, log_path, merged_out, mode = "correlate";
  std::vector<std::string> filter_classes;
  std::string tcp;
  bool merge = false;

  auto* simulate = app.add_subcommand("simulate", "Simulate per-second detections from annotations");
  add_common(simulate, common);
  simulate->add_option("--out", out_path, "Low-level JSONL stream (sidecar metadata written next to it)");

  auto* truelog = app.add_subcommand("truelog", "Build the true event log from annotations");
  add_common(truelog, common);
  truelog->add_option("--out", out_path, "XES output");

  auto* aggregate = app.add_subcommand("aggregate", "Aggregate a low-level stream into activity instances");
  add_common(aggregate, common);
  aggregate->add_option("--in", in_path, "Low-level JSONL stream");
  aggregate->add_option("--out", out_path, "Instance JSONL output");

  auto* export_cmd = app.add_subcommand("export-xes", "Export activity instances as an XES log");
  add_common(export_cmd, common);
  export_cmd->add_option("--instances", in_path, "Instance JSONL input");
  export_cmd->add_option("--out", out_path, "XES output");
  export_cmd->add_option("--mode", mode, "correlate (one trace per case) or default (one trace)")
      ->check(CLI::IsMember({"correlate", "default"}));
  export_cmd->add_option("--merged-out", merged_out, "Also write the log after merging subsequent instances");
  export_cmd->add_option("--filter-class", filter_classes, "Remove this class from the built log (repeatable)");

  auto* evaluate = app.add_subcommand("evaluate", "Match extracted against true instances");
  add_common(evaluate, common);
  evaluate->add_option("--true", true_path, "True XES log");
  evaluate->add_option("--extracted", extracted_path, "Extracted XES log");
  evaluate->add_flag("--merge", merge, "Merge subsequent same-class instances of the extracted log first");

  auto* conformance = app.add_subcommand("conformance", "Alignment fitness and precision against a reference model");
  add_common(conformance, common);
  conformance->add_option("--log", log_path, "XES log");
  conformance->add_option("--out", out_path, "JSON report");
  conformance->add_flag("--merge", merge, "Merge subsequent same-class instances first");

  auto* discover_cmd = app.add_subcommand("discover", "Inductive Miner - infrequent");
  add_common(discover_cmd, common);
  discover_cmd->add_option("--log", log_path, "XES log");
  discover_cmd->add_flag("--merge", merge, "Merge subsequent same-class instances first");

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage and write all artifacts");
  add_common(pipeline, common);

  auto* notify = app.add_subcommand("notify", "Emit the events of an XES log one JSON line at a time");
  notify->add_option("--log", log_path, "XES log")->required();
  notify->add_option("--out", out_path, "File sink; standard output when omitted");
  notify->add_option("--tcp", tcp, "host:port of a TCP sink");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (simulate->parsed()) {
      PipelineConfig cfg = resolve(common);
      require_file(cfg.annotations_path, "annotations");
      ClassRegistry registry = cfg.registry();
      auto anns = load_annotations_file(cfg.annotations_path, &registry);
      auto stream = simulate_detections(anns, cfg.noise, registry);
      std::string path = in_dir(cfg, out_path, "low_level.jsonl");
      std::ostringstream csv;
      write_annotations_csv(csv, anns);
      std::string meta = sidecar_path(path);
      write_file_atomic(path, low_level_to_jsonl(stream));
      write_file_atomic(meta, simulation_metadata_json(cfg.noise, content_hash(csv.str())));
      summary(out, "simulate", {{"events", stream.size()}, {"output", path}, {"metadata", meta}});
    } else if (truelog->parsed()) {
      PipelineConfig cfg = resolve(common);
      require_file(cfg.annotations_path, "annotations");
      ClassRegistry registry = cfg.registry();
      EventLog log = annotations_to_true_log(load_annotations_file(cfg.annotations_path, &registry), registry);
      std::string path = in_dir(cfg, out_path, "true.xes");
      write_file_atomic(path, export_xes(log, cfg.epoch_unix_ms));
      summary(out, "truelog", {{"traces", log.traces.size()}, {"events", log.event_count()}, {"output", path}});
    } else if (aggregate->parsed()) {
      PipelineConfig cfg = resolve(common);
      std::string src = !in_path.empty() ? in_path
                        : !cfg.low_level_path.empty() ? cfg.low_level_path
                                                      : in_dir(cfg, "", "low_level.jsonl");
      require_file(src, "low-level stream");
      auto instances = aggregate_instances(load_low_level_file(src), cfg.aggregator);
      std::string path = in_dir(cfg, out_path, "instances.jsonl");
      write_file_atomic(path, instances_to_jsonl(instances));
      summary(out, "aggregate", {{"instances", instances.size()}, {"output", path}});
    } else if (export_cmd->parsed()) {
      PipelineConfig cfg = resolve(common);
      std::string src = in_dir(cfg, in_path, "instances.jsonl");
      require_file(src, "instance file");
      auto instances = load_instances_file(src);
      ClassRegistry registry = cfg.registry();
      EventLog log = mode == "default" ? default_trace_log(instances, registry)
                                       : correlate_cases(instances, cfg.aggregator.case_marker, registry);
      for (const auto& c : filter_classes) log = filter_class(log, ActivityClass(c));
      std::string path = in_dir(cfg, out_path, "extracted.xes");
      std::string xes = export_xes(log, cfg.epoch_unix_ms);
      check_xes_schema(xes);
      ojson fields{{"traces", log.traces.size()}, {"events", log.event_count()}, {"output", path}};
      write_file_atomic(path, xes);
      if (!merged_out.empty()) {
        EventLog merged = merge_subsequent(log);
        write_file_atomic(merged_out, export_xes(merged, cfg.epoch_unix_ms));
        fields["merged_events"] = merged.event_count();
        fields["merged_output"] = merged_out;
      }
      summary(out, "export-xes", fields);
    } else if (evaluate->parsed()) {
      PipelineConfig cfg = resolve(common);
      std::string tp = in_dir(cfg, true_path, "true.xes");
      std::string ep = in_dir(cfg, extracted_path, "extracted_merged.xes");
      require_file(tp, "true log");
      require_file(ep, "extracted log");
      EventLog truth = import_xes_file(tp).log;
      EventLog extracted = import_xes_file(ep).log;
      if (merge) extracted = merge_subsequent(extracted);
      auto records = evaluate_logs(truth, extracted, cfg.resources);
      ConfusionMatrix matrix = build_confusion_matrix(records, axis_labels(cfg));
      Metrics metrics = compute_metrics(matrix);
      write_artifacts(cfg.out_dir, {{"confusion.csv", matrix.to_csv()},
                                    {"confusion.json", matrix.to_json()},
                                    {"metrics.json", metrics.to_json()}});
      OutcomeCounts n = count_outcomes(records);
      summary(out, "evaluate",
              {{"accuracy", metrics.accuracy},
               {"weighted_precision", metrics.weighted_precision},
               {"weighted_recall", metrics.weighted_recall},
               {"correct", n.correct},
               {"misclassified", n.misclassified},
               {"not_observed", n.not_observed},
               {"not_existing", n.not_existing},
               {"output_dir", cfg.out_dir}});
    } else if (conformance->parsed()) {
      PipelineConfig cfg = resolve(common);
      std::string lp = in_dir(cfg, log_path, "extracted_merged.xes");
      require_file(lp, "log");
      if (cfg.model_spec_path.empty() && cfg.model_pnml_path.empty()) {
        throw ConfigError("conformance needs --model-spec or --model-pnml");
      }
      EventLog log = import_xes_file(lp).log;
      if (merge) log = merge_subsequent(log);
      PetriNet net = load_reference_model(cfg);
      auto result = check_conformance(log, net, AlignOptions{{}, cfg.state_budget}, cfg.fitness_aggregation);
      std::string path = in_dir(cfg, out_path, "conformance.json");
      write_file_atomic(path, conformance_json(result));
      summary(out, "conformance",
              {{"fitness", result.fitness.fitness},
               {"precision", result.precision ? ojson(result.precision->precision) : ojson(nullptr)},
               {"synchronous_moves", result.fitness.synchronous},
               {"log_moves", result.fitness.log_moves},
               {"model_moves", result.fitness.model_moves},
               {"output", path}});
    } else if (discover_cmd->parsed()) {
      PipelineConfig cfg = resolve(common);
      std::string lp = in_dir(cfg, log_path, "extracted_merged.xes");
      require_file(lp, "log");
      EventLog log = import_xes_file(lp).log;
      if (merge) log = merge_subsequent(log);
      DiscoveryResult d = discover(log, cfg.imf_threshold, AlignOptions{{}, cfg.state_budget});
      write_artifacts(cfg.out_dir, {{"discovered.pnml", export_pnml(d.net)},
                                    {"discovered_tree.txt", to_string(d.tree) + "\n"},
                                    {"discovery.json", d.to_json()}});
      summary(out, "discover",
              {{"tree", to_string(d.tree)},
               {"fitness", d.fitness.fitness},
               {"precision", d.precision.precision},
               {"output_dir", cfg.out_dir}});
    } else if (pipeline->parsed()) {
      PipelineConfig cfg = resolve(common);
      require_file(cfg.annotations_path, "annotations");
      PipelineResult r = run_pipeline(cfg);
      std::map<std::string, std::string> hashes;
      if (!cfg.low_level_path.empty()) hashes["low_level"] = content_hash(read_file(cfg.low_level_path));
      if (!cfg.model_spec_path.empty()) hashes["model_spec"] = content_hash(read_file(cfg.model_spec_path));
      if (!cfg.model_pnml_path.empty()) hashes["model_pnml"] = content_hash(read_file(cfg.model_pnml_path));
      auto artifacts = pipeline_artifacts(cfg, r, hashes);
      write_artifacts(cfg.out_dir, artifacts);
      ojson fields{{"accuracy", r.metrics.accuracy},
                   {"weighted_precision", r.metrics.weighted_precision},
                   {"weighted_recall", r.metrics.weighted_recall},
                   {"true_instances", log_instances(r.true_log).size()},
                   {"extracted_instances", log_instances(r.merged_log).size()},
                   {"discovered_tree", to_string(r.discovery.tree)}};
      if (r.true_conformance) {
        fields["true_fitness"] = r.true_conformance->fitness.fitness;
        fields["extracted_fitness"] = r.extracted_conformance->fitness.fitness;
      }
      fields["output_dir"] = cfg.out_dir;
      fields["artifacts"] = artifacts.size();
      summary(out, "pipeline", fields);
    } else if (notify->parsed()) {
      ImportedLog imported = import_xes_file(log_path);
      std::vector<HighLevelEvent> events;
      for (const auto& t : imported.log.traces) events.insert(events.end(), t.events.begin(), t.events.end());
      sort_events(events);
      std::unique_ptr<EventSink> sink;
      if (!tcp.empty()) {
        auto colon = tcp.rfind(':');
        if (colon == std::string::npos) throw ConfigError("--tcp expects host:port");
        int port = 0;
        try {
          port = std::stoi(tcp.substr(colon + 1));
        } catch (const std::exception&) {
          throw ConfigError("--tcp expects host:port");
        }
        if (port <= 0 || port > 65535) throw ConfigError("--tcp port out of range");
        sink = std::make_unique<TcpSink>(tcp.substr(0, colon), static_cast<std::uint16_t>(port));
      } else if (!out_path.empty()) {
        sink = std::make_unique<FileSink>(out_path);
      } else {
        sink = std::make_unique<OstreamSink>(out);
      }
      notify_stream(events, *sink, imported.epoch_unix_ms);
      if (!tcp.empty() || !out_path.empty()) summary(out, "notify", {{"events", events.size()}});
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace vpm
