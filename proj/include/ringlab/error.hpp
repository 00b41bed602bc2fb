#pragma once

#include <stdexcept>
#include <string>

namespace ringlab {

enum class ErrorKind {
  configuration,
  degenerate_signal,
  detectability,
  hypothesis,
  branch,
  structure,
  contour,
  inversion,
  resolution,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::degenerate_signal: return "degenerate_signal";
    case ErrorKind::detectability: return "detectability";
    case ErrorKind::hypothesis: return "hypothesis";
    case ErrorKind::branch: return "branch";
    case ErrorKind::structure: return "structure";
    case ErrorKind::contour: return "contour";
    case ErrorKind::inversion: return "inversion";
    case ErrorKind::resolution: return "resolution";
  }
  return "unknown";
}

/// Single exception type for the library; the kind tells callers which
/// precondition failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const char* what) {
  if (!cond) fail(kind, what);
}

}  // namespace ringlab
