#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dicke {

enum class ErrorKind {
  InvalidArgument,
  NoTransition,
  EigensolverFailure,
  DefectiveMatrix,
  MarginalMode,
  UnstableFixedPoint,
  CondensateDepleted,
  NotConverged,
  NoInteriorExtremum,
  BranchAmbiguity,
  InsufficientData,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` lets callers branch on the
/// failure class (the CLI maps these to exit codes).
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Configuration/precondition problems as opposed to numerical failures.
  bool is_input_error() const noexcept {
    return kind_ == ErrorKind::InvalidArgument || kind_ == ErrorKind::NoTransition ||
           kind_ == ErrorKind::InsufficientData;
  }

private:
  ErrorKind kind_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorKind::InvalidArgument, message);
}

}  // namespace dicke
