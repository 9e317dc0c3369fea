#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "vpm/detector_sim.hpp"
#include "vpm/error.hpp"
#include "vpm/event_aggregator.hpp"
#include "vpm/notifier.hpp"
#include "vpm/xes_io.hpp"

using namespace vpm;
namespace fs = std::filesystem;

namespace {

constexpr std::int64_t k2020 = 1577836800000;

EventLog one_stir() {
  return correlate_cases({ActivityInstance{ActivityClass("stir"), "r1", 0, 3000, std::nullopt}}, ActivityClass("stir"));
}

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("vpm_test_" + name + "_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("timestamps") {
  CHECK(format_timestamp(0) == "1970-01-01T00:00:00.000Z");
  CHECK(format_timestamp(k2020 + 3000) == "2020-01-01T00:00:03.000Z");
  CHECK(format_timestamp(951782400123) == "2000-02-29T00:00:00.123Z");
  CHECK(parse_timestamp("2020-01-01T00:00:03.000Z") == k2020 + 3000);
  CHECK(parse_timestamp("2020-01-01T01:00:03+01:00") == k2020 + 3000);
  CHECK(parse_timestamp("2020-01-01T00:00:03") == k2020 + 3000);
  CHECK(parse_timestamp("2020-01-01T00:00:03.5Z") == k2020 + 3500);
  CHECK_THROWS_AS(parse_timestamp("2020-13-01T00:00:00Z"), ParseError);
  CHECK_THROWS_AS(parse_timestamp("yesterday"), ParseError);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 500; ++i) {
    auto ms = static_cast<std::int64_t>(rng() % 4102444800000ULL);
    CHECK(parse_timestamp(format_timestamp(ms)) == ms);
  }
}

TEST_CASE("empty log export") {
  std::string xml = export_xes(EventLog{});
  CHECK(xml.find("<log") != std::string::npos);
  CHECK(xml.find("<trace") == std::string::npos);
  for (const char* ext : {"concept", "time", "lifecycle", "org"}) {
    CHECK(xml.find("prefix=\"" + std::string(ext) + "\"") != std::string::npos);
  }
  check_xes_schema(xml);
  auto imported = import_xes(xml);
  CHECK(imported.log.traces.empty());
}

TEST_CASE("export with epoch") {
  std::string xml = export_xes(one_stir(), k2020);
  CHECK(xml.find("value=\"2020-01-01T00:00:00.000Z\"") != std::string::npos);
  CHECK(xml.find("value=\"2020-01-01T00:00:03.000Z\"") != std::string::npos);
  auto body = xml.find("<trace>");
  CHECK(xml.find("value=\"start\"", body) < xml.find("value=\"complete\"", body));
  CHECK(export_xes(one_stir(), k2020) == xml);
  auto imported = import_xes(xml);
  CHECK(imported.epoch_unix_ms == k2020);
  CHECK(imported.log == one_stir());
}

TEST_CASE("round trip of generated logs") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    ScenarioConfig cfg;
    cfg.variants = synthetic_crepe_variants();
    cfg.duration_s = 120;
    cfg.resources = 2;
    cfg.idle_resources = static_cast<int>(seed % 2);
    cfg.seed = seed;
    auto anns = synthesize_annotations(cfg);
    NoiseConfig n;
    n.p_miss = 0.1;
    n.p_split = 0.1;
    n.seed = seed;
    auto inst = aggregate_instances(simulate_detections(anns, n), AggregatorConfig{});
    EventLog extracted = correlate_cases(inst, ActivityClass("stir"));
    for (const EventLog& log : {annotations_to_true_log(anns), extracted, merge_subsequent(extracted)}) {
      const std::int64_t epoch = k2020 + static_cast<std::int64_t>(seed) * 1000;
      std::string xml = export_xes(log, epoch);
      check_xes_schema(xml);
      auto back = import_xes(xml);
      CHECK(back.log == log);
      CHECK(back.epoch_unix_ms == epoch);
      CHECK(export_xes(back.log, back.epoch_unix_ms) == xml);
    }
  }
}

TEST_CASE("attributes survive a round trip") {
  EventLog log = one_stir();
  log.log_attributes["source"] = std::string("cam <1> & \"2\"");
  log.traces[0].attributes["weight"] = 2.5;
  log.traces[0].events[0].attributes["frame"] = std::int64_t{17};
  log.traces[0].events[1].attributes["manual"] = true;
  auto back = import_xes(export_xes(log, 5));
  CHECK(back.log == log);
}

TEST_CASE("import without epoch attribute uses the earliest event") {
  std::string xml = export_xes(one_stir(), k2020 + 7000);
  auto pos = xml.find("vpm:epoch");
  REQUIRE(pos != std::string::npos);
  auto line_start = xml.rfind('\n', pos);
  auto line_end = xml.find('\n', pos);
  xml.erase(line_start, line_end - line_start);
  auto back = import_xes(xml);
  CHECK(back.epoch_unix_ms == k2020 + 7000);
  CHECK(back.log.traces[0].events[0].timestamp_ms == 0);
  CHECK(back.log.traces[0].events[1].timestamp_ms == 3000);
}

TEST_CASE("schema errors") {
  std::string xml = export_xes(one_stir());
  std::string missing = xml;
  auto pos = missing.find("<string key=\"lifecycle:transition\"", missing.find("<trace>"));
  REQUIRE(pos != std::string::npos);
  missing.erase(pos, missing.find("/>", pos) + 2 - pos);
  CHECK_THROWS_AS(check_xes_schema(missing), SchemaError);
  try {
    import_xes(missing);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("lifecycle:transition") != std::string::npos);
  }

  std::string bad_lc = xml;
  pos = bad_lc.find("value=\"start\"");
  bad_lc.replace(pos, 13, "value=\"resume\"");
  CHECK_THROWS_AS(import_xes(bad_lc), SchemaError);

  CHECK_THROWS_AS(import_xes("<log><trace>"), ParseError);
  CHECK_THROWS_AS(import_xes("<notalog/>"), SchemaError);
}

TEST_CASE("notifier file sink") {
  auto dir = temp_dir("notify");
  auto path = dir / "events.jsonl";
  EventLog log = one_stir();
  {
    FileSink sink(path.string());
    notify_stream(log.traces[0].events, sink, k2020);
  }
  auto lines = read_lines(path);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] ==
        R"({"class":"stir","lifecycle":"start","timestamp":"2020-01-01T00:00:00.000Z","resource":"r1","case_id":"r1#1"})");
  CHECK(lines[1].find("\"lifecycle\":\"complete\"") != std::string::npos);

  auto empty_path = dir / "empty.jsonl";
  {
    FileSink sink(empty_path.string());
    notify_stream({}, sink);
  }
  CHECK(fs::file_size(empty_path) == 0);

  FileSink closed((dir / "closed.jsonl").string());
  closed.close();
  CHECK_THROWS_AS(notify_stream(log.traces[0].events, closed), SinkUnavailable);

  std::vector<HighLevelEvent> backwards{log.traces[0].events[1], log.traces[0].events[0]};
  std::ostringstream os;
  OstreamSink osink(os);
  CHECK_THROWS_AS(notify_stream(backwards, osink), Error);
  const std::string written = os.str();
  CHECK(std::count(written.begin(), written.end(), '\n') == 1);

  fs::remove_all(dir);
}

TEST_CASE("notifier tcp sink") {
  int srv = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(srv >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  REQUIRE(::bind(srv, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  REQUIRE(::listen(srv, 1) == 0);
  socklen_t len = sizeof addr;
  ::getsockname(srv, reinterpret_cast<sockaddr*>(&addr), &len);
  const auto port = ntohs(addr.sin_port);

  EventLog log = one_stir();
  {
    TcpSink sink("127.0.0.1", port);
    notify_stream(log.traces[0].events, sink);
    sink.close();
    CHECK_THROWS_AS(sink.write_line("x"), SinkUnavailable);
  }
  int conn = ::accept(srv, nullptr, nullptr);
  REQUIRE(conn >= 0);
  std::string received;
  char buf[512];
  for (ssize_t n; (n = ::read(conn, buf, sizeof buf)) > 0;) received.append(buf, static_cast<std::size_t>(n));
  ::close(conn);
  ::close(srv);
  CHECK(std::count(received.begin(), received.end(), '\n') == 2);
  CHECK(received.rfind(notification_json(log.traces[0].events[0]) + "\n", 0) == 0);

  CHECK_THROWS_AS(TcpSink("127.0.0.1", port), SinkUnavailable);
}
