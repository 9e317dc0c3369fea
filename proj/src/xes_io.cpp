#include "vpm/xes_io.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "vpm/error.hpp"

namespace vpm {

namespace {

namespace pt = boost::property_tree;

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::string escape_xml(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_attr(std::ostringstream& os, const std::string& indent, const std::string& key, const Scalar& v) {
  os << indent;
  if (auto s = std::get_if<std::string>(&v)) {
    os << "<string key=\"" << escape_xml(key) << "\" value=\"" << escape_xml(*s) << "\"/>\n";
  } else if (auto i = std::get_if<std::int64_t>(&v)) {
    os << "<int key=\"" << escape_xml(key) << "\" value=\"" << *i << "\"/>\n";
  } else if (auto d = std::get_if<double>(&v)) {
    os << "<float key=\"" << escape_xml(key) << "\" value=\"" << format_double(*d) << "\"/>\n";
  } else {
    os << "<boolean key=\"" << escape_xml(key) << "\" value=\"" << (std::get<bool>(v) ? "true" : "false") << "\"/>\n";
  }
}

void write_attrs(std::ostringstream& os, const std::string& indent, const AttributeMap& attrs) {
  for (const auto& [k, v] : attrs) write_attr(os, indent, k, v);
}

std::string attr_of(const pt::ptree& node, const char* name) {
  if (auto a = node.get_child_optional("<xmlattr>")) {
    if (auto v = a->get_optional<std::string>(name)) return *v;
  }
  return {};
}

bool has_attr(const pt::ptree& node, const char* name) {
  auto a = node.get_child_optional("<xmlattr>");
  return a && a->get_child_optional(name);
}

bool is_attribute_element(const std::string& tag) {
  return tag == "string" || tag == "date" || tag == "int" || tag == "float" || tag == "boolean" || tag == "id";
}

std::optional<Scalar> read_scalar(const std::string& tag, const std::string& value) {
  if (tag == "string" || tag == "date" || tag == "id") return Scalar{value};
  if (tag == "int") {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || p != value.data() + value.size()) throw ParseError("invalid int attribute '" + value + "'");
    return Scalar{v};
  }
  if (tag == "float") {
    try {
      std::size_t used = 0;
      double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      return Scalar{v};
    } catch (const std::exception&) {
      throw ParseError("invalid float attribute '" + value + "'");
    }
  }
  if (tag == "boolean") {
    if (value == "true") return Scalar{true};
    if (value == "false") return Scalar{false};
    throw ParseError("invalid boolean attribute '" + value + "'");
  }
  return std::nullopt;
}

struct RawEvent {
  std::optional<std::string> name, lifecycle, resource;
  std::optional<std::int64_t> time;
  AttributeMap attributes;
};

}  // namespace

std::string format_timestamp(std::int64_t unix_ms) {
  const std::int64_t days = floor_div(unix_ms, 86'400'000);
  std::int64_t rem = unix_ms - days * 86'400'000;
  std::int64_t y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  const int hh = static_cast<int>(rem / 3'600'000);
  rem %= 3'600'000;
  const int mm = static_cast<int>(rem / 60'000);
  rem %= 60'000;
  const int ss = static_cast<int>(rem / 1000);
  const int ms = static_cast<int>(rem % 1000);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<long long>(y), m, d, hh, mm,
                ss, ms);
  return buf;
}

std::int64_t parse_timestamp(std::string_view s) {
  auto fail = [&]() -> std::int64_t { throw ParseError("invalid timestamp '" + std::string(s) + "'"); };
  auto num = [&](std::size_t pos, std::size_t len) -> std::int64_t {
    if (pos + len > s.size()) fail();
    std::int64_t v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') fail();
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':') {
    fail();
  }
  const std::int64_t y = num(0, 4), mo = num(5, 2), d = num(8, 2), h = num(11, 2), mi = num(14, 2), se = num(17, 2);
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60) fail();
  std::size_t pos = 19;
  std::int64_t frac_ms = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == start) fail();
    std::string digits(s.substr(start, std::min<std::size_t>(pos - start, 3)));
    while (digits.size() < 3) digits.push_back('0');
    frac_ms = std::stoll(digits);
  }
  std::int64_t offset_min = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      const int sign = s[pos] == '+' ? 1 : -1;
      const std::int64_t oh = num(pos + 1, 2);
      std::size_t mpos = pos + 3;
      if (mpos < s.size() && s[mpos] == ':') ++mpos;
      const std::int64_t om = num(mpos, 2);
      offset_min = sign * (oh * 60 + om);
      pos = mpos + 2;
    }
  }
  if (pos != s.size()) fail();
  const std::int64_t days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
  return ((days * 24 + h) * 60 + mi - offset_min) * 60'000 + se * 1000 + frac_ms;
}

std::string export_xes(const EventLog& log, std::int64_t epoch_unix_ms) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<log xes.version=\"1849-2016\" xes.features=\"\" xmlns=\"http://www.xes-standard.org/\">\n";
  os << "  <extension name=\"Concept\" prefix=\"concept\" uri=\"http://www.xes-standard.org/concept.xesext\"/>\n";
  os << "  <extension name=\"Time\" prefix=\"time\" uri=\"http://www.xes-standard.org/time.xesext\"/>\n";
  os << "  <extension name=\"Lifecycle\" prefix=\"lifecycle\" uri=\"http://www.xes-standard.org/lifecycle.xesext\"/>\n";
  os << "  <extension name=\"Organizational\" prefix=\"org\" uri=\"http://www.xes-standard.org/org.xesext\"/>\n";
  os << "  <global scope=\"trace\">\n";
  os << "    <string key=\"concept:name\" value=\"\"/>\n";
  os << "  </global>\n";
  os << "  <global scope=\"event\">\n";
  os << "    <string key=\"concept:name\" value=\"\"/>\n";
  os << "    <string key=\"lifecycle:transition\" value=\"complete\"/>\n";
  os << "    <date key=\"time:timestamp\" value=\"1970-01-01T00:00:00.000Z\"/>\n";
  os << "    <string key=\"org:resource\" value=\"\"/>\n";
  os << "  </global>\n";
  os << "  <classifier name=\"Activity\" keys=\"concept:name\"/>\n";
  os << "  <classifier name=\"Activity and lifecycle\" keys=\"concept:name lifecycle:transition\"/>\n";
  os << "  <date key=\"" << kEpochAttribute << "\" value=\"" << format_timestamp(epoch_unix_ms) << "\"/>\n";
  std::string registry;
  for (const auto& l : log.class_registry.labels()) {
    if (!registry.empty()) registry += ',';
    registry += l;
  }
  os << "  <string key=\"" << kRegistryAttribute << "\" value=\"" << escape_xml(registry) << "\"/>\n";
  write_attrs(os, "  ", log.log_attributes);

  std::vector<const Trace*> traces;
  for (const auto& t : log.traces) traces.push_back(&t);
  std::stable_sort(traces.begin(), traces.end(), [](const Trace* a, const Trace* b) { return a->case_id < b->case_id; });
  for (const Trace* t : traces) {
    os << "  <trace>\n";
    os << "    <string key=\"concept:name\" value=\"" << escape_xml(t->case_id) << "\"/>\n";
    write_attrs(os, "    ", t->attributes);
    for (const auto& e : t->events) {
      os << "    <event>\n";
      os << "      <string key=\"concept:name\" value=\"" << escape_xml(e.cls.label()) << "\"/>\n";
      os << "      <string key=\"lifecycle:transition\" value=\"" << to_string(e.lifecycle) << "\"/>\n";
      os << "      <date key=\"time:timestamp\" value=\"" << format_timestamp(epoch_unix_ms + e.timestamp_ms) << "\"/>\n";
      os << "      <string key=\"org:resource\" value=\"" << escape_xml(e.resource) << "\"/>\n";
      write_attrs(os, "      ", e.attributes);
      os << "    </event>\n";
    }
    os << "  </trace>\n";
  }
  os << "</log>\n";
  return os.str();
}

ImportedLog import_xes(std::string_view xml) {
  pt::ptree doc;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, doc, pt::xml_parser::no_comments);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("malformed XML: ") + e.message(), e.line());
  }
  auto root = doc.get_child_optional("log");
  if (!root) throw SchemaError("missing <log> root element");

  ImportedLog result;
  EventLog& log = result.log;
  std::optional<std::int64_t> epoch;
  std::optional<std::string> registry_text;

  struct RawTrace {
    std::string case_id;
    AttributeMap attributes;
    std::vector<RawEvent> events;
  };
  std::vector<RawTrace> raw_traces;

  for (const auto& [tag, node] : *root) {
    if (is_attribute_element(tag)) {
      const std::string key = attr_of(node, "key");
      const std::string value = attr_of(node, "value");
      if (key == kEpochAttribute) {
        epoch = parse_timestamp(value);
      } else if (key == kRegistryAttribute) {
        registry_text = value;
      } else if (auto v = read_scalar(tag, value)) {
        log.log_attributes[key] = *v;
      }
      continue;
    }
    if (tag != "trace") continue;
    RawTrace rt;
    std::optional<std::string> trace_name;
    for (const auto& [ttag, tnode] : node) {
      if (is_attribute_element(ttag)) {
        const std::string key = attr_of(tnode, "key");
        const std::string value = attr_of(tnode, "value");
        if (key == "concept:name") {
          trace_name = value;
        } else if (auto v = read_scalar(ttag, value)) {
          rt.attributes[key] = *v;
        }
        continue;
      }
      if (ttag != "event") continue;
      RawEvent ev;
      for (const auto& [etag, enode] : tnode) {
        if (!is_attribute_element(etag)) continue;
        if (!has_attr(enode, "key")) continue;
        const std::string key = attr_of(enode, "key");
        const std::string value = attr_of(enode, "value");
        if (key == "concept:name") {
          ev.name = value;
        } else if (key == "lifecycle:transition") {
          ev.lifecycle = value;
        } else if (key == "org:resource") {
          ev.resource = value;
        } else if (key == "time:timestamp") {
          ev.time = parse_timestamp(value);
        } else if (auto v = read_scalar(etag, value)) {
          ev.attributes[key] = *v;
        }
      }
      const std::string where = " in event " + std::to_string(rt.events.size() + 1) + " of trace " +
                                std::to_string(raw_traces.size() + 1);
      if (!ev.name || ev.name->empty()) throw SchemaError("missing concept:name" + where);
      if (!ev.time) throw SchemaError("missing time:timestamp" + where);
      if (!ev.lifecycle) throw SchemaError("missing lifecycle:transition" + where);
      if (!parse_lifecycle(*ev.lifecycle)) {
        throw SchemaError("lifecycle:transition '" + *ev.lifecycle + "' is neither start nor complete" + where);
      }
      if (!ev.resource) throw SchemaError("missing org:resource" + where);
      rt.events.push_back(std::move(ev));
    }
    if (!trace_name) throw SchemaError("missing concept:name in trace " + std::to_string(raw_traces.size() + 1));
    rt.case_id = *trace_name;
    raw_traces.push_back(std::move(rt));
  }

  if (!epoch) {
    std::int64_t earliest = std::numeric_limits<std::int64_t>::max();
    for (const auto& t : raw_traces)
      for (const auto& e : t.events) earliest = std::min(earliest, *e.time);
    epoch = earliest == std::numeric_limits<std::int64_t>::max() ? 0 : earliest;
  }
  result.epoch_unix_ms = *epoch;

  if (registry_text) {
    std::string cur;
    for (char c : *registry_text + ",") {
      if (c == ',') {
        if (!cur.empty()) log.class_registry.add(ActivityClass{cur});
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
  }
  for (auto& rt : raw_traces) {
    Trace t;
    t.case_id = rt.case_id;
    t.attributes = std::move(rt.attributes);
    for (auto& re : rt.events) {
      HighLevelEvent e;
      e.cls = ActivityClass{*re.name};
      e.lifecycle = *parse_lifecycle(*re.lifecycle);
      e.timestamp_ms = *re.time - *epoch;
      e.resource = *re.resource;
      e.case_id = t.case_id;
      e.attributes = std::move(re.attributes);
      log.class_registry.add(e.cls);
      t.events.push_back(std::move(e));
    }
    log.traces.push_back(std::move(t));
  }
  return result;
}

ImportedLog import_xes_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open XES file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return import_xes(buf.str());
}

void check_xes_schema(std::string_view xml) { (void)import_xes(xml); }

}  // namespace vpm
