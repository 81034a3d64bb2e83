#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace infdiag {

enum class ErrorKind {
  Validation,          // diagram or document breaks a structural rule
  ImpossibleEvidence,  // observation has zero probability
  Structural,          // operation precondition unmet / no admissible reduction
  UnknownNode,
  InvalidArgument,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct Violation {
  std::string node;  // empty for diagram-level rules
  std::string rule;
  std::string message;

  bool operator==(const Violation&) const = default;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  ValidationError(const std::string& message, std::vector<Violation> violations);

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

inline Error structural_error(const std::string& message) {
  return Error(ErrorKind::Structural, message);
}

inline Error impossible_evidence(const std::string& message) {
  return Error(ErrorKind::ImpossibleEvidence, message);
}

inline Error unknown_node(const std::string& id) {
  return Error(ErrorKind::UnknownNode, "unknown node '" + id + "'");
}

inline Error invalid_argument(const std::string& message) {
  return Error(ErrorKind::InvalidArgument, message);
}

}  // namespace infdiag
