#pragma once

#include <stdexcept>
#include <string>

namespace iblab {

// Failure categories. Each maps to a distinct process exit code.
enum class ErrorKind {
  kConfig,     // invalid configuration, shape mismatch, out-of-domain argument
  kData,       // malformed input data (labels out of range, corrupt IDX files)
  kNumerical,  // divergence, calibration failure, non-finite values
  kIo,         // filesystem failures, checkpoint integrity, schema mismatch
  kUsage,      // API misuse (backward without a recorded forward pass, ...)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

int exit_code(ErrorKind kind) noexcept;
const char* to_string(ErrorKind kind) noexcept;

}  // namespace iblab
