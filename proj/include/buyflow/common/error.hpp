#pragma once

#include <stdexcept>
#include <string>

namespace buyflow {

// Base class for every error raised by the library. Callers that only need a
// diagnostic catch this; callers that need to branch catch the subclasses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (CSV/JSONL/template). Carries the offending path and,
// when known, the 1-based line number.
class InputError : public Error {
 public:
  InputError(std::string path, std::size_t line, const std::string& what)
      : Error(path + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

}  // namespace buyflow
