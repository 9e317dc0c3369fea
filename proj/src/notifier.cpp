#include "vpm/notifier.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include "json.hpp"
#include <ostream>

#include "vpm/error.hpp"
#include "vpm/xes_io.hpp"

namespace vpm {

void OstreamSink::write_line(std::string_view line) {
  if (!out_) throw SinkUnavailable("output stream is in a failed state");
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw SinkUnavailable("write to output stream failed");
}

FileSink::FileSink(const std::string& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw SinkUnavailable("cannot open notification file '" + path + "'");
}

void FileSink::write_line(std::string_view line) {
  if (!out_.is_open()) throw SinkUnavailable("notification file '" + path_ + "' is closed");
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw SinkUnavailable("write to '" + path_ + "' failed");
}

void FileSink::close() { out_.close(); }

TcpSink::TcpSink(const std::string& host, std::uint16_t port) : endpoint_(host + ":" + std::to_string(port)) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
    throw SinkUnavailable("cannot resolve " + endpoint_);
  }
  for (addrinfo* p = res; p; p = p->ai_next) {
    int fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) {
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  freeaddrinfo(res);
  if (fd_ < 0) throw SinkUnavailable("cannot connect to " + endpoint_);
}

TcpSink::~TcpSink() { close(); }

void TcpSink::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void TcpSink::write_line(std::string_view line) {
  if (fd_ < 0) throw SinkUnavailable("connection to " + endpoint_ + " is closed");
  std::string buf(line);
  buf.push_back('\n');
  std::size_t sent = 0;
  while (sent < buf.size()) {
    ssize_t n = ::send(fd_, buf.data() + sent, buf.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw SinkUnavailable("send to " + endpoint_ + " failed: " + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::string notification_json(const HighLevelEvent& event, std::int64_t epoch_unix_ms) {
  nlohmann::ordered_json j;
  j["class"] = event.cls.label();
  j["lifecycle"] = std::string(to_string(event.lifecycle));
  j["timestamp"] = format_timestamp(epoch_unix_ms + event.timestamp_ms);
  j["resource"] = event.resource;
  if (event.case_id) {
    j["case_id"] = *event.case_id;
  } else {
    j["case_id"] = nullptr;
  }
  return j.dump();
}

void notify_stream(std::span<const HighLevelEvent> events, EventSink& sink, std::int64_t epoch_unix_ms) {
  const HighLevelEvent* prev = nullptr;
  for (const auto& e : events) {
    if (prev && event_order_less(e, *prev)) {
      throw Error("notification stream out of order at " + std::to_string(e.timestamp_ms) + " ms");
    }
    sink.write_line(notification_json(e, epoch_unix_ms));
    prev = &e;
  }
}

}  // namespace vpm
