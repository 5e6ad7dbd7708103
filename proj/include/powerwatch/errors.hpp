#pragma once

#include <stdexcept>
#include <string>

namespace powerwatch {

// Base of every error raised by the engine. Callers that only care about
// "something went wrong in powerwatch" can catch this one.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyWatchlist : public Error {
 public:
  EmptyWatchlist() : Error("watchlist is empty") {}
};

class SizingError : public Error {
 public:
  using Error::Error;
};

class EmptyScan : public Error {
 public:
  EmptyScan() : Error("scan has no outcomes") {}
};

class OrderingError : public Error {
 public:
  using Error::Error;
};

class UnknownRegion : public Error {
 public:
  explicit UnknownRegion(const std::string& county)
      : Error("unknown region: " + county) {}
};

class BackendError : public Error {
 public:
  using Error::Error;
};

class RestoreError : public Error {
 public:
  RestoreError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace powerwatch
