#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slvideo {

// One code per failure mode across the library. The service maps each to a
// stable machine-readable string and an HTTP status.
enum class ErrorCode {
  // annotation store
  MalformedEaf,
  UnresolvedTimeSlot,
  DanglingReference,
  InvalidInterval,
  EmptyGloss,
  ConcurrentEditConflict,
  UnknownVideo,
  UnknownAnnotation,
  EmptyQuery,
  InvalidIdentifier,
  // segmenter
  NotFacialExpressionTier,
  MediaMissing,
  ExtractionFailed,
  PipelineFailed,
  // embedder
  EncoderUnavailable,
  DimensionMismatch,
  UnreadableFrame,
  EmptyInput,
  DegenerateEmbedding,
  // vector index
  NotNormalized,
  UnknownField,
  UnknownDocument,
  CorruptIndexFile,
  VersionMismatch,
  // query engine / service
  UnknownMode,
  StaleDocument,
  ConfigInvalid,
  BindFailure,
  BadRequest,
  Io,
  Internal,
};

std::string_view error_code_name(ErrorCode code);
int error_http_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

void log_warning(std::string_view message);

}  // namespace slvideo
