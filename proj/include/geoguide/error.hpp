#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geoguide {

enum class ErrorCode {
  // tensor-linalg
  NonConvergence,
  FullSpace,
  ZeroMatrix,
  NonFinite,
  // grassmann-geodesic
  DimensionMismatch,
  OutOfRange,
  DegenerateProjection,
  // guidance-losses / encoder-sim
  ZeroVector,
  ZeroActivation,
  BoxOutOfBounds,
  // inversion-engine
  DegenerateDirection,
  InvalidConfig,
  // metrics
  ShapeMismatch,
  TooSmall,
  EmptyBatch,
  // feature-io
  BadMagic,
  TruncatedPayload,
  IoError,
  RaggedRows,
  ParseError,
};

std::string_view error_name(ErrorCode code) noexcept;

/// True for codes that describe bad input files or arguments rather than a
/// failed computation. The CLI maps these to exit code 2.
bool is_usage_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Same error with `context` appended to the message.
  Error with_context(const std::string& context) const { return Error(code_, detail_ + " " + context); }

private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace geoguide
