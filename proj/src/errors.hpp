#pragma once

#include <stdexcept>
#include <string>

namespace fjsim {

enum class ErrorCode {
  InvalidArgument,
  ParseError,
  UnstableStation,
  HeavyTail,
  RootNotBracketed,
  TiltOutsideDomain,
  BudgetExceeded,
  InsufficientSamples,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

}  // namespace fjsim
