#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "slvideo/config.hpp"
#include "slvideo/encoder.hpp"
#include "slvideo/errors.hpp"

namespace slvideo {

// {"code", "message", "http_status"} for any error; non-library exceptions
// map to code "internal".
nlohmann::json api_error_json(ErrorCode code, const std::string& message);

// HTTP backend over one corpus:
//   GET  /health
//   GET  /videos
//   GET  /videos/{video_id}/annotations
//   GET  /videos/{video_id}/eaf
//   POST /search                      {"mode", "query", "k"}
//   GET  /similar/{doc_id}?field=all&k=10
//   POST /annotations                 {Annotation}
//   PUT  /annotations/{video_id}/{annotation_id}   {Annotation with revision}
//   DELETE /annotations/{video_id}/{annotation_id}?revision=N
//   POST /admin/reindex
//   GET  /segments/{doc_id}/frames    frame URLs under /frames/
class Service {
 public:
  // Loads the store and, if present, the persisted index. Throws ConfigInvalid.
  explicit Service(Config config);
  // Same, with a caller-owned encoder (tests, embedding in other programs).
  Service(Config config, std::shared_ptr<Encoder> encoder);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Port 0 binds an ephemeral port. Returns the bound port; throws BindFailure.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  // bind + listen on a background thread.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Serves the encoder wire protocol (/v1/info, /v1/encode_text,
// /v1/encode_image) on top of any Encoder, e.g. the mock for contract tests.
class EncoderProtocolServer {
 public:
  explicit EncoderProtocolServer(std::shared_ptr<Encoder> encoder, std::size_t max_batch = 256);
  ~EncoderProtocolServer();

  EncoderProtocolServer(const EncoderProtocolServer&) = delete;
  EncoderProtocolServer& operator=(const EncoderProtocolServer&) = delete;

  int bind(const std::string& host, int port);
  void listen();
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace slvideo
