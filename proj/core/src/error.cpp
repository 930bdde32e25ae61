#include "umanip/error.hpp"

namespace umanip {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kLimitViolation: return "limit-violation";
    case ErrorKind::kGeometry: return "geometry";
    case ErrorKind::kImmovable: return "immovable";
    case ErrorKind::kNearAxis: return "near-axis";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kEmptyBuffer: return "empty-buffer";
    case ErrorKind::kScore: return "score";
    case ErrorKind::kArgument: return "argument";
    case ErrorKind::kEnvironment: return "environment";
    case ErrorKind::kUndefinedTask: return "undefined-task";
    case ErrorKind::kDegenerateTrace: return "degenerate-trace";
    case ErrorKind::kRankDeficient: return "rank-deficiency";
    case ErrorKind::kInsufficientData: return "insufficient-data";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + message),
      kind_(kind) {}

}  // namespace umanip
