#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace peerbalance {

enum class ErrorCode {
  InputDomain,
  InsufficientEnergy,
  InvalidPair,
  InvalidPopulation,
  DegenerateDistribution,
  LengthMismatch,
  EnumerationLimit,
  WrongRegime,
  ScheduleExhausted,
  Config,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; `code()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace peerbalance
