#pragma once

#include <stdexcept>
#include <string>

namespace btristd {

enum class ErrorKind {
  Partition,
  Shape,
  Contraction,
  Numerical,
  Parameter,
  Input,
  Range,
  Format,
  Divergence,
  Spec,
  UndefinedPd,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Partition: return "partition error";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::Contraction: return "contraction error";
    case ErrorKind::Numerical: return "numerical error";
    case ErrorKind::Parameter: return "parameter error";
    case ErrorKind::Input: return "input error";
    case ErrorKind::Range: return "range error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Divergence: return "divergence error";
    case ErrorKind::Spec: return "spec error";
    case ErrorKind::UndefinedPd: return "undefined Pd";
  }
  return "error";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI) can map it to a message without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace btristd
