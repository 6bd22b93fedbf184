#pragma once

#include <stdexcept>
#include <string>

namespace olqr {

enum class ErrorCode {
  kDimension,
  kHorizon,
  kSolver,
  kDivergence,
  kDomain,
  kBranch,
  kStream,
  kSize,
  kConfig,
  kInstanceMismatch,
  kIo,
  kParse,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries a code so callers (the sweep
// driver in particular) can tag rows without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace olqr
