#pragma once

#include <stdexcept>
#include <string>

namespace tdcr {

enum class ErrorKind {
  invalid_argument,  // contract violation (bad shapes, bad config values)
  io,                // filesystem failures
  corrupt_header,    // container magic/header damaged
  truncated_record,  // container ends mid-record
  version_mismatch,  // container written by an incompatible format version
  numeric,           // NaN/Inf where finiteness is required
  divergence,        // training or simulation blew up
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace tdcr
