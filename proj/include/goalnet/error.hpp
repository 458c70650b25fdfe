#pragma once

#include <stdexcept>
#include <string>

namespace goalnet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An object id, relation or action name does not resolve against the schema,
// or a state bit is set on a class that does not declare it.
class SchemaViolation : public Error {
 public:
  using Error::Error;
};

// Raised by apply_action when a precondition does not hold.
class IllegalAction : public Error {
 public:
  IllegalAction(const std::string& action, const std::string& violated)
      : Error("illegal action " + action + ": precondition " + violated + " violated"),
        violated_(violated) {}
  const std::string& violated_template() const { return violated_; }

 private:
  std::string violated_;
};

class DomainMismatch : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A goal the planner could not reach within its limits.
class PlanningError : public Error {
 public:
  using Error::Error;
};

// Non-finite values in a numeric computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace goalnet
