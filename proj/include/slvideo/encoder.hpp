#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slvideo/embedding.hpp"
#include "slvideo/segmenter.hpp"

namespace slvideo {

enum class EncoderKind { Remote, Mock };

std::string_view to_string(EncoderKind kind);
EncoderKind encoder_kind_from_string(std::string_view s);

// What the pipeline needs to know to reach an encoder.
struct EncoderConfig {
  EncoderKind kind = EncoderKind::Mock;
  std::string endpoint;  // Remote only, e.g. "http://127.0.0.1:8100"
  std::string model_name = "mock";
  std::size_t dim = 512;
  std::size_t batch_size = 32;
};

// Image-text encoder. Outputs are raw (not normalized) and always have length
// dim(); implementations must be safe to call from several threads.
class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual EncoderKind kind() const = 0;
  virtual const std::string& model_name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::vector<Embedding> encode_texts(std::span<const std::string> texts) = 0;
  // Each entry is the encoded image file content (PNG bytes).
  virtual std::vector<Embedding> encode_images(std::span<const std::string> images) = 0;
};

// Deterministic stand-in: a stable 64-bit hash of the input bytes seeds a
// fixed pseudo-random sequence, unit-normalized. Identical input gives a
// bitwise-identical vector on every platform.
class MockEncoder final : public Encoder {
 public:
  explicit MockEncoder(std::size_t dim = 512, std::string model_name = "mock");

  EncoderKind kind() const override { return EncoderKind::Mock; }
  const std::string& model_name() const override { return model_name_; }
  std::size_t dim() const override { return dim_; }
  std::vector<Embedding> encode_texts(std::span<const std::string> texts) override;
  std::vector<Embedding> encode_images(std::span<const std::string> images) override;

  Embedding encode_bytes(std::string_view domain, std::string_view bytes) const;

 private:
  std::size_t dim_;
  std::string model_name_;
};

// HTTP client for the encoder wire protocol (/v1/info, /v1/encode_text,
// /v1/encode_image). Transport failures and non-200 replies raise
// EncoderUnavailable; vectors of the wrong length raise DimensionMismatch.
class RemoteEncoder final : public Encoder {
 public:
  RemoteEncoder(std::string endpoint, std::size_t dim, std::string model_name,
                std::size_t batch_size = 32);

  EncoderKind kind() const override { return EncoderKind::Remote; }
  const std::string& model_name() const override { return model_name_; }
  std::size_t dim() const override { return dim_; }
  std::vector<Embedding> encode_texts(std::span<const std::string> texts) override;
  std::vector<Embedding> encode_images(std::span<const std::string> images) override;

  // GET /v1/info; returns {model, dim}.
  std::pair<std::string, std::size_t> info() const;

 private:
  std::vector<Embedding> post_batch(const std::string& path, const std::string& key,
                                    std::span<const std::string> items) const;

  std::string endpoint_;
  std::size_t dim_;
  std::string model_name_;
  std::size_t batch_size_;
};

std::unique_ptr<Encoder> make_encoder(const EncoderConfig& config);

// Raw vector for one text. Throws EmptyQuery on blank input.
Embedding encode_text(Encoder& enc, std::string_view text);

// One raw vector per frame file, positionally aligned.
// Throws UnreadableFrame naming the path.
std::vector<Embedding> encode_frames(Encoder& enc,
                                     std::span<const std::filesystem::path> frame_paths);

// Raw gloss vector. Throws EmptyGloss on blank input.
Embedding annotation_embedding(Encoder& enc, std::string_view gloss);

// encode_frames once, then the six aggregations plus the gloss vector.
SignEmbeddings build_sign_embeddings(Encoder& enc, const Segment& seg, std::string_view gloss);

std::string base64_encode(std::string_view bytes);
// Throws BadRequest on malformed input.
std::string base64_decode(std::string_view text);

}  // namespace slvideo
