#pragma once

#include <stdexcept>
#include <string>

namespace causalkit {

// Error taxonomy shared by the library and the CLI exit-code mapping:
// Io maps to exit code 2, everything else to 1.
enum class ErrorKind { Config, Io, Parse, Range, Integrity, Contract, Validation };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Range: return "range";
    case ErrorKind::Integrity: return "integrity";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Validation: return "validation";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

inline void require(bool ok, ErrorKind kind, const std::string& msg) {
  if (!ok) fail(kind, msg);
}

inline void check_contract(bool ok, const std::string& msg) { require(ok, ErrorKind::Contract, msg); }

}  // namespace causalkit
