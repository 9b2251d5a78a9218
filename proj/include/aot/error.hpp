#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aot {

/// Failure classes raised by the library. Every public operation reports
/// contract violations through aot::Error carrying one of these codes.
enum class ErrorCode {
  NotSymmetric,
  NotPositiveDefinite,
  NonFinite,
  DimensionMismatch,
  BadSplit,
  BadCorrelation,
  NonPositiveWeight,
  BadAngle,
  BadParameter,
  TooLarge,
  UnsupportedDimension,
  InternalConsistency,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadSplit: return "BadSplit";
    case ErrorCode::BadCorrelation: return "BadCorrelation";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::BadAngle: return "BadAngle";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::InternalConsistency: return "InternalConsistency";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

template <typename Index>
inline void require_same_dim(Index lhs, Index rhs, const char* context) {
  if (lhs != rhs) {
    fail(ErrorCode::DimensionMismatch,
         std::string(context) + ": " + std::to_string(lhs) + " vs " + std::to_string(rhs));
  }
}

}  // namespace detail
}  // namespace aot
