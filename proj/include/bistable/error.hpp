#pragma once

#include <stdexcept>
#include <string>

namespace bistable {

enum class ErrorCode {
  InvalidArgument,
  NonFinite,
  EmptyWindow,
  TooShort,
  NotNormalized,
  BadSupport,
  ZeroNominal,
  OutOfSupport,
  Underdetermined,
  DegenerateSpread,
  EmptyInput,
  TooFewSamples,
  EmptyEvent,
  GridMismatch,
  Config,
  Io,
};

const char* to_string(ErrorCode code);

// True for failures of the numerics (as opposed to bad input or configuration).
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bistable
