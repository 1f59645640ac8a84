#pragma once

#include <stdexcept>
#include <string>

namespace pstar {

enum class Errc {
  // state construction
  MissingPredicate,
  Cycle,
  Conflict,
  BadHand,
  // action semantics
  PreconditionFailed,
  UnknownBlock,
  BlockHeld,
  // text handling
  Syntax,
  UnknownPredicate,
  UndeclaredObject,
  ArityMismatch,
  UnknownOp,
  DegenerateGoal,
  // planning
  UnsupportedGoalShape,
  LimitExceeded,
  Unsolvable,
  // generation
  InfeasibleParams,
  RejectionExhausted,
  // harness
  InvalidExemplar,
  ConfigError,
  InsufficientData,
  Io,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        message_(std::move(message)) {}

  Errc code() const { return code_; }
  const std::string& detail() const { return message_; }

 private:
  Errc code_;
  std::string message_;
};

[[noreturn]] inline void raise(Errc code, std::string message) {
  throw Error(code, std::move(message));
}

}  // namespace pstar
