#include "slvideo/errors.hpp"

#include <iostream>
#include <mutex>

namespace slvideo {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedEaf: return "malformed_eaf";
    case ErrorCode::UnresolvedTimeSlot: return "unresolved_time_slot";
    case ErrorCode::DanglingReference: return "dangling_reference";
    case ErrorCode::InvalidInterval: return "invalid_interval";
    case ErrorCode::EmptyGloss: return "empty_gloss";
    case ErrorCode::ConcurrentEditConflict: return "concurrent_edit_conflict";
    case ErrorCode::UnknownVideo: return "unknown_video";
    case ErrorCode::UnknownAnnotation: return "unknown_annotation";
    case ErrorCode::EmptyQuery: return "empty_query";
    case ErrorCode::InvalidIdentifier: return "invalid_identifier";
    case ErrorCode::NotFacialExpressionTier: return "not_facial_expression_tier";
    case ErrorCode::MediaMissing: return "media_missing";
    case ErrorCode::ExtractionFailed: return "extraction_failed";
    case ErrorCode::PipelineFailed: return "pipeline_failed";
    case ErrorCode::EncoderUnavailable: return "encoder_unavailable";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::UnreadableFrame: return "unreadable_frame";
    case ErrorCode::EmptyInput: return "empty_input";
    case ErrorCode::DegenerateEmbedding: return "degenerate_embedding";
    case ErrorCode::NotNormalized: return "not_normalized";
    case ErrorCode::UnknownField: return "unknown_field";
    case ErrorCode::UnknownDocument: return "unknown_document";
    case ErrorCode::CorruptIndexFile: return "corrupt_index_file";
    case ErrorCode::VersionMismatch: return "version_mismatch";
    case ErrorCode::UnknownMode: return "unknown_mode";
    case ErrorCode::StaleDocument: return "stale_document";
    case ErrorCode::ConfigInvalid: return "config_invalid";
    case ErrorCode::BindFailure: return "bind_failure";
    case ErrorCode::BadRequest: return "bad_request";
    case ErrorCode::Io: return "io_error";
    case ErrorCode::Internal: return "internal";
  }
  return "internal";
}

int error_http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownVideo:
    case ErrorCode::UnknownAnnotation:
    case ErrorCode::UnknownDocument:
    case ErrorCode::StaleDocument:
      return 404;
    case ErrorCode::ConcurrentEditConflict:
      return 409;
    case ErrorCode::EncoderUnavailable:
      return 503;
    case ErrorCode::MediaMissing:
    case ErrorCode::ExtractionFailed:
    case ErrorCode::PipelineFailed:
    case ErrorCode::UnreadableFrame:
    case ErrorCode::CorruptIndexFile:
    case ErrorCode::VersionMismatch:
    case ErrorCode::ConfigInvalid:
    case ErrorCode::BindFailure:
    case ErrorCode::Io:
    case ErrorCode::Internal:
      return 500;
    default:
      return 400;
  }
}

void log_warning(std::string_view message) {
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::clog << "[slvideo] warning: " << message << '\n';
}

}  // namespace slvideo
