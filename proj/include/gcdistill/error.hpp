#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gcd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed log line. Line numbers are 1-based, byte offsets are from the
// start of the stream.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t offset, const std::string& what)
      : Error("line " + std::to_string(line) + ", byte " + std::to_string(offset) + ": " + what),
        line_(line),
        offset_(offset) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

// Well-formed lines that do not describe a valid invocation.
class StructuralError : public Error {
 public:
  StructuralError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  // 0 when the problem is not tied to a single line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MissingMetricError : public Error {
 public:
  explicit MissingMetricError(const std::string& metric, const std::string& where = {})
      : Error("missing metric '" + metric + "'" + (where.empty() ? "" : " in " + where)), metric_(metric) {}

  const std::string& metric() const noexcept { return metric_; }

 private:
  std::string metric_;
};

class MissingDataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what) : Error(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace gcd
