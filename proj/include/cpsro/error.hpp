#pragma once

#include <stdexcept>
#include <string>

namespace cpsro {

// Caller broke an operation's preconditions (illegal action, terminal state, shape mismatch).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// Bad user-supplied configuration (unknown game id, invalid hyperparameter, malformed file).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values reached a numeric kernel.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Exact computation refused: the game tree exceeds the node cap. Use the approximate path.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

#define CPSRO_CHECK(cond, msg)                       \
  do {                                               \
    if (!(cond)) throw ::cpsro::ContractViolation(msg); \
  } while (0)

}  // namespace cpsro
