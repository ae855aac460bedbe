#pragma once

#include <stdexcept>
#include <string>

namespace mmot {

/// Bad input: malformed files, invalid manifests, violated preconditions.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A numerical routine failed to produce a certified result
/// (Newton non-convergence, multistart disagreement, singular systems).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A condition that the toolkit itself guarantees was violated.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace mmot
