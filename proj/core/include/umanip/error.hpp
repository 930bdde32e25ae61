#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace umanip {

enum class ErrorKind {
  kLimitViolation,
  kGeometry,
  kImmovable,
  kNearAxis,
  kShape,
  kEmptyBuffer,
  kScore,
  kArgument,
  kEnvironment,
  kUndefinedTask,
  kDegenerateTrace,
  kRankDeficient,
  kInsufficientData,
  kSchema,
  kConfig,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace umanip
