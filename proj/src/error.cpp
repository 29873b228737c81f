#include "geoguide/error.hpp"

namespace geoguide {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::FullSpace: return "FullSpace";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DegenerateProjection: return "DegenerateProjection";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::ZeroActivation: return "ZeroActivation";
    case ErrorCode::BoxOutOfBounds: return "BoxOutOfBounds";
    case ErrorCode::DegenerateDirection: return "DegenerateDirection";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

bool is_usage_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::BadMagic:
    case ErrorCode::TruncatedPayload:
    case ErrorCode::IoError:
    case ErrorCode::RaggedRows:
    case ErrorCode::ParseError:
      return true;
    default:
      return false;
  }
}

}  // namespace geoguide
