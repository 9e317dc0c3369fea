#include "vpm/io.hpp"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vpm/error.hpp"

namespace vpm {

using nlohmann::json;

std::string low_level_to_jsonl(const std::vector<LowLevelEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    json j;
    j["video_id"] = e.video_id;
    j["t"] = e.t;
    j["resource"] = e.resource;
    if (e.bbox) j["bbox"] = {e.bbox->x1, e.bbox->y1, e.bbox->x2, e.bbox->y2};
    json scores = json::object();
    for (const auto& [cls, s] : e.scores) scores[cls.label()] = s;
    j["scores"] = scores;
    out += j.dump();
    out += '\n';
  }
  return out;
}

namespace {

template <typename Fn>
auto field(const json& j, const char* key, std::size_t line, Fn&& get) {
  if (!j.contains(key)) throw ParseError(std::string("missing key '") + key + "'", line);
  try {
    return get(j.at(key));
  } catch (const json::exception&) {
    throw ParseError(std::string("wrong type for key '") + key + "'", line);
  }
}

json parse_line(const std::string& text, std::size_t line) {
  try {
    json j = json::parse(text);
    if (!j.is_object()) throw ParseError("expected a JSON object", line);
    return j;
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line);
  }
}

std::string strict_string(const json& v) {
  if (!v.is_string()) throw json::type_error::create(302, "expected string", &v);
  return v.get<std::string>();
}

std::int64_t strict_int(const json& v) {
  if (!v.is_number_integer()) throw json::type_error::create(302, "expected integer", &v);
  return v.get<std::int64_t>();
}

}  // namespace

std::vector<LowLevelEvent> parse_low_level_jsonl(std::istream& in) {
  std::vector<LowLevelEvent> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = parse_line(text, line);
    LowLevelEvent e;
    e.video_id = field(j, "video_id", line, strict_string);
    e.t = field(j, "t", line, strict_int);
    e.resource = field(j, "resource", line, strict_string);
    if (j.contains("bbox") && !j["bbox"].is_null()) {
      const json& b = j["bbox"];
      if (!b.is_array() || b.size() != 4 || !std::all_of(b.begin(), b.end(), [](const json& v) { return v.is_number(); })) {
        throw ParseError("bbox must be an array of 4 numbers", line);
      }
      e.bbox = BBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
    }
    const json& scores = field(j, "scores", line, [](const json& v) -> const json& {
      if (!v.is_object()) throw json::type_error::create(302, "expected object", &v);
      return v;
    });
    for (const auto& [label, s] : scores.items()) {
      if (!s.is_number()) throw ParseError("score of '" + label + "' is not a number", line);
      if (label.empty()) throw ParseError("empty class label", line);
      e.scores[ActivityClass(label)] = s.get<double>();
    }
    out.push_back(std::move(e));
  }
  return validate_low_level_stream(std::move(out));
}

std::vector<LowLevelEvent> load_low_level_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open low-level stream '" + path + "'");
  return parse_low_level_jsonl(in);
}

std::string instances_to_jsonl(const std::vector<ActivityInstance>& instances) {
  std::string out;
  for (const auto& i : instances) {
    json j;
    j["class"] = i.cls.label();
    j["resource"] = i.resource;
    j["start_ms"] = i.start_ms;
    j["complete_ms"] = i.complete_ms;
    j["case_id"] = i.case_id ? json(*i.case_id) : json(nullptr);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<ActivityInstance> parse_instances_jsonl(std::istream& in) {
  std::vector<ActivityInstance> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = parse_line(text, line);
    ActivityInstance i;
    std::string label = field(j, "class", line, strict_string);
    if (label.empty()) throw ParseError("empty class label", line);
    i.cls = ActivityClass(label);
    i.resource = field(j, "resource", line, strict_string);
    i.start_ms = field(j, "start_ms", line, strict_int);
    i.complete_ms = field(j, "complete_ms", line, strict_int);
    if (j.contains("case_id") && !j["case_id"].is_null()) i.case_id = field(j, "case_id", line, strict_string);
    try {
      validate_instance(i);
    } catch (const InvalidInstance& e) {
      throw ParseError(e.what(), line);
    }
    out.push_back(std::move(i));
  }
  return out;
}

std::vector<ActivityInstance> load_instances_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open instance file '" + path + "'");
  return parse_instances_jsonl(in);
}

std::string simulation_metadata_json(const NoiseConfig& noise, const std::string& annotations_hash) {
  nlohmann::ordered_json j;
  j["generator"] = std::string(kGeneratorName);
  j["seed"] = noise.seed;
  j["sub_seed_rule"] = "fnv1a64(seed as 8 little-endian bytes, video_id)";
  j["p_miss"] = noise.p_miss;
  j["p_split"] = noise.p_split;
  j["score_sharpness"] = noise.score_sharpness;
  nlohmann::ordered_json conf = nlohmann::ordered_json::object();
  for (const auto& [from, row] : noise.confusion) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (const auto& [to, p] : row) r[to.label()] = p;
    conf[from.label()] = r;
  }
  j["confusion"] = conf;
  j["annotations_fnv1a64"] = annotations_hash;
  return j.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw Error("short write to '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot rename onto '" + path + "'");
  }
}

std::string content_hash(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

}  // namespace vpm
