// Writes a synthetic crepe scenario: annotation CSV, variant spec and a
// pipeline config referencing both.
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vpm/detector_sim.hpp"
#include "vpm/error.hpp"
#include "vpm/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic crepe scenario generator", "vpm_scenario"};
  vpm::ScenarioConfig cfg;
  cfg.variants = vpm::synthetic_crepe_variants();
  std::string out_dir = "scenario";
  app.add_option("--out-dir", out_dir, "Destination directory");
  app.add_option("--resources", cfg.resources, "Actors doing crepe work")->check(CLI::Range(1, 50));
  app.add_option("--idle-resources", cfg.idle_resources, "Actors doing nothing process related")->check(CLI::Range(0, 50));
  app.add_option("--duration", cfg.duration_s, "Video length in seconds")->check(CLI::PositiveNumber);
  app.add_option("--video-id", cfg.video_id, "Video identifier");
  app.add_option("--seed", cfg.seed, "Scenario seed");
  CLI11_PARSE(app, argc, argv);

  try {
    auto anns = vpm::synthesize_annotations(cfg);
    std::ostringstream csv;
    vpm::write_annotations_csv(csv, anns);
    std::ostringstream spec;
    spec << "# synthetic crepe recipes\n";
    int k = 0;
    for (const auto& v : cfg.variants) {
      spec << "variant" << ++k << ": ";
      for (std::size_t i = 0; i < v.size(); ++i) spec << (i ? "," : "") << v[i];
      spec << "\n";
    }
    namespace fs = std::filesystem;
    vpm::write_file_atomic((fs::path(out_dir) / "annotations.csv").string(), csv.str());
    vpm::write_file_atomic((fs::path(out_dir) / "variants.txt").string(), spec.str());
    vpm::write_file_atomic((fs::path(out_dir) / "pipeline.json").string(),
                           "{\n  \"annotations\": \"annotations.csv\",\n  \"model_spec\": \"variants.txt\",\n"
                           "  \"out_dir\": \"out\",\n  \"epoch\": \"2021-06-01T09:00:00Z\",\n"
                           "  \"noise\": {\"p_miss\": 0.1, \"p_split\": 0.05, \"seed\": 7},\n"
                           "  \"imf_threshold\": 0.2\n}\n");
    std::cout << "{\"status\":\"ok\",\"annotations\":" << anns.size() << ",\"out_dir\":\"" << out_dir << "\"}\n";
  } catch (const vpm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
