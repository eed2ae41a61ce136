#pragma once

#include <stdexcept>
#include <string>

namespace rleceo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// The evaluation budget has no evaluations left.
class BudgetExhausted : public ContractError {
 public:
  using ContractError::ContractError;
};

// A problem returned malformed or non-finite values.
class ProblemDefinitionError : public Error {
 public:
  using Error::Error;
};

// Unknown registry name or unsupported dimension.
class LookupError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  enum class Kind { io, parse, version, shape, metadata };

  CheckpointError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace rleceo
