#pragma once

#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "vpm/event_model.hpp"

namespace vpm {

// Destination of single-event notifications, one line per event.
class EventSink {
 public:
  virtual ~EventSink() = default;
  // Throws SinkUnavailable when the line cannot be delivered.
  virtual void write_line(std::string_view line) = 0;
};

class OstreamSink : public EventSink {
 public:
  explicit OstreamSink(std::ostream& out) : out_(out) {}
  void write_line(std::string_view line) override;

 private:
  std::ostream& out_;
};

class FileSink : public EventSink {
 public:
  explicit FileSink(const std::string& path);
  void write_line(std::string_view line) override;
  void close();

 private:
  std::string path_;
  std::ofstream out_;
};

// Connects on construction; every line is sent as it is produced.
class TcpSink : public EventSink {
 public:
  TcpSink(const std::string& host, std::uint16_t port);
  ~TcpSink() override;
  TcpSink(const TcpSink&) = delete;
  TcpSink& operator=(const TcpSink&) = delete;

  void write_line(std::string_view line) override;
  void close();

 private:
  int fd_ = -1;
  std::string endpoint_;
};

// {"class","lifecycle","timestamp","resource","case_id"} in that key order.
std::string notification_json(const HighLevelEvent& event, std::int64_t epoch_unix_ms = 0);

// Writes each event as soon as it is visited. Events must be in canonical
// order; an out-of-order event raises Error before it is written.
void notify_stream(std::span<const HighLevelEvent> events, EventSink& sink, std::int64_t epoch_unix_ms = 0);

}  // namespace vpm
