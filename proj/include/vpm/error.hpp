#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vpm {

// Base of every domain error. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DuplicateKey : public Error {
 public:
  using Error::Error;
};

class ScoreOutOfRange : public Error {
 public:
  using Error::Error;
};

class MalformedBBox : public Error {
 public:
  using Error::Error;
};

class UnbalancedLifecycle : public Error {
 public:
  using Error::Error;
};

class InvalidInstance : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what), line_(0) {}

  // 1-based line number, 0 when not line oriented.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class SinkUnavailable : public Error {
 public:
  using Error::Error;
};

class OverlappingTruth : public Error {
 public:
  using Error::Error;
};

class AmbiguousMatch : public Error {
 public:
  using Error::Error;
};

class EmptyMatrix : public Error {
 public:
  using Error::Error;
};

class NotEnabled : public Error {
 public:
  using Error::Error;
};

class FinalUnreachable : public Error {
 public:
  using Error::Error;
};

class StateBudgetExceeded : public Error {
 public:
  explicit StateBudgetExceeded(std::size_t limit)
      : Error("alignment search exceeded state budget of " + std::to_string(limit)),
        limit_(limit) {}
  std::size_t limit() const { return limit_; }

 private:
  std::size_t limit_;
};

class EmptyLog : public Error {
 public:
  using Error::Error;
};

class DuplicateVariantName : public Error {
 public:
  using Error::Error;
};

class InvalidNet : public Error {
 public:
  using Error::Error;
};

}  // namespace vpm
