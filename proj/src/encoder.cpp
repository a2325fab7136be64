#include "slvideo/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/beast/core/detail/base64.hpp>
#include <httplib.h>
#include <json.hpp>

#include "slvideo/errors.hpp"
#include "slvideo/text.hpp"

namespace slvideo {

std::string_view to_string(EncoderKind kind) {
  return kind == EncoderKind::Mock ? "mock" : "remote";
}

EncoderKind encoder_kind_from_string(std::string_view s) {
  if (s == "mock") return EncoderKind::Mock;
  if (s == "remote") return EncoderKind::Remote;
  throw Error(ErrorCode::ConfigInvalid, "unknown encoder kind '" + std::string(s) + "'");
}

namespace {

std::uint64_t fnv1a64(std::string_view domain, std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (unsigned char c : domain) mix(c);
  mix(0);
  for (unsigned char c : bytes) mix(c);
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

MockEncoder::MockEncoder(std::size_t dim, std::string model_name)
    : dim_(dim), model_name_(std::move(model_name)) {
  if (dim_ == 0) throw Error(ErrorCode::ConfigInvalid, "encoder dim must be positive");
}

Embedding MockEncoder::encode_bytes(std::string_view domain, std::string_view bytes) const {
  std::uint64_t state = fnv1a64(domain, bytes);
  std::vector<double> v(dim_);
  double sq = 0.0;
  for (auto& x : v) {
    double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    x = 2.0 * u - 1.0;
    sq += x * x;
  }
  double n = std::sqrt(sq);
  for (auto& x : v) x /= n;
  return Embedding(std::move(v));
}

std::vector<Embedding> MockEncoder::encode_texts(std::span<const std::string> texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(encode_bytes("text", t));
  return out;
}

std::vector<Embedding> MockEncoder::encode_images(std::span<const std::string> images) {
  std::vector<Embedding> out;
  out.reserve(images.size());
  for (const auto& img : images) out.push_back(encode_bytes("image", img));
  return out;
}

RemoteEncoder::RemoteEncoder(std::string endpoint, std::size_t dim, std::string model_name,
                             std::size_t batch_size)
    : endpoint_(std::move(endpoint)),
      dim_(dim),
      model_name_(std::move(model_name)),
      batch_size_(std::max<std::size_t>(1, batch_size)) {
  if (endpoint_.empty()) throw Error(ErrorCode::ConfigInvalid, "remote encoder needs an endpoint");
  if (dim_ == 0) throw Error(ErrorCode::ConfigInvalid, "encoder dim must be positive");
}

std::pair<std::string, std::size_t> RemoteEncoder::info() const {
  httplib::Client cli(endpoint_);
  cli.set_connection_timeout(5);
  auto res = cli.Get("/v1/info");
  if (!res) {
    throw Error(ErrorCode::EncoderUnavailable,
                "encoder " + endpoint_ + " unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::EncoderUnavailable,
                "encoder " + endpoint_ + " /v1/info returned " + std::to_string(res->status));
  }
  try {
    auto j = nlohmann::json::parse(res->body);
    return {j.at("model").get<std::string>(), j.at("dim").get<std::size_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::EncoderUnavailable, std::string("malformed /v1/info reply: ") + e.what());
  }
}

std::vector<Embedding> RemoteEncoder::post_batch(const std::string& path, const std::string& key,
                                                 std::span<const std::string> items) const {
  httplib::Client cli(endpoint_);
  cli.set_connection_timeout(5);
  cli.set_read_timeout(300);
  std::vector<Embedding> out;
  out.reserve(items.size());
  for (std::size_t at = 0; at < items.size(); at += batch_size_) {
    auto chunk = items.subspan(at, std::min(batch_size_, items.size() - at));
    nlohmann::json body = {{key, std::vector<std::string>(chunk.begin(), chunk.end())}};
    auto res = cli.Post(path, body.dump(), "application/json");
    if (!res) {
      throw Error(ErrorCode::EncoderUnavailable,
                  "encoder " + endpoint_ + " unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw Error(ErrorCode::EncoderUnavailable,
                  "encoder " + endpoint_ + path + " returned " + std::to_string(res->status));
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::EncoderUnavailable, std::string("malformed encoder reply: ") + e.what());
    }
    if (!reply.contains("vectors") || !reply["vectors"].is_array() ||
        reply["vectors"].size() != chunk.size()) {
      throw Error(ErrorCode::EncoderUnavailable,
                  "encoder reply does not carry one vector per input");
    }
    if (reply.contains("dim") && reply["dim"].get<std::size_t>() != dim_) {
      throw Error(ErrorCode::DimensionMismatch,
                  "encoder reports dim " + reply["dim"].dump() + ", expected " +
                      std::to_string(dim_));
    }
    for (const auto& v : reply["vectors"]) {
      auto values = v.get<std::vector<double>>();
      if (values.size() != dim_) {
        throw Error(ErrorCode::DimensionMismatch, "encoder returned vector of length " +
                                                      std::to_string(values.size()) +
                                                      ", expected " + std::to_string(dim_));
      }
      out.emplace_back(std::move(values));
    }
  }
  return out;
}

std::vector<Embedding> RemoteEncoder::encode_texts(std::span<const std::string> texts) {
  return post_batch("/v1/encode_text", "texts", texts);
}

std::vector<Embedding> RemoteEncoder::encode_images(std::span<const std::string> images) {
  std::vector<std::string> encoded;
  encoded.reserve(images.size());
  for (const auto& img : images) encoded.push_back(base64_encode(img));
  return post_batch("/v1/encode_image", "images_b64", encoded);
}

std::unique_ptr<Encoder> make_encoder(const EncoderConfig& config) {
  if (config.kind == EncoderKind::Mock) {
    return std::make_unique<MockEncoder>(config.dim, config.model_name);
  }
  return std::make_unique<RemoteEncoder>(config.endpoint, config.dim, config.model_name,
                                         config.batch_size);
}

namespace {

void check_dims(const Encoder& enc, const std::vector<Embedding>& vs) {
  for (const auto& v : vs) {
    if (v.dim() != enc.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "encoder returned dimension " +
                                                    std::to_string(v.dim()) + ", expected " +
                                                    std::to_string(enc.dim()));
    }
  }
}

}  // namespace

Embedding encode_text(Encoder& enc, std::string_view text) {
  if (trim(text).empty()) throw Error(ErrorCode::EmptyQuery, "text to encode is empty");
  std::string t(text);
  auto out = enc.encode_texts(std::span<const std::string>(&t, 1));
  if (out.size() != 1) throw Error(ErrorCode::EncoderUnavailable, "encoder returned no vector");
  check_dims(enc, out);
  return std::move(out.front());
}

std::vector<Embedding> encode_frames(Encoder& enc,
                                     std::span<const std::filesystem::path> frame_paths) {
  if (frame_paths.empty()) throw Error(ErrorCode::EmptyInput, "no frames to encode");
  std::vector<std::string> images;
  images.reserve(frame_paths.size());
  for (const auto& p : frame_paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::UnreadableFrame, "cannot read frame " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::UnreadableFrame, "cannot read frame " + p.string());
    images.push_back(std::move(buf).str());
  }
  auto out = enc.encode_images(images);
  if (out.size() != images.size()) {
    throw Error(ErrorCode::EncoderUnavailable, "encoder returned " + std::to_string(out.size()) +
                                                   " vectors for " +
                                                   std::to_string(images.size()) + " frames");
  }
  check_dims(enc, out);
  return out;
}

Embedding annotation_embedding(Encoder& enc, std::string_view gloss) {
  if (trim(gloss).empty()) throw Error(ErrorCode::EmptyGloss, "gloss is empty");
  return encode_text(enc, gloss);
}

SignEmbeddings build_sign_embeddings(Encoder& enc, const Segment& seg, std::string_view gloss) {
  if (seg.frame_paths.empty()) {
    throw Error(ErrorCode::EmptyInput, "segment " + seg.doc_id() + " has no extracted frames");
  }
  auto frames = encode_frames(enc, seg.frame_paths);
  auto gloss_vec = annotation_embedding(enc, gloss);
  return assemble_sign_embeddings(seg.doc_id(), frames, gloss_vec);
}

std::string base64_encode(std::string_view bytes) {
  namespace b64 = boost::beast::detail::base64;
  std::string out(b64::encoded_size(bytes.size()), '\0');
  out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
  return out;
}

std::string base64_decode(std::string_view text) {
  namespace b64 = boost::beast::detail::base64;
  auto valid_char = [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
           c == '+' || c == '/';
  };
  if (text.size() % 4 != 0) throw Error(ErrorCode::BadRequest, "base64 length not a multiple of 4");
  std::size_t pad = 0;
  while (pad < 2 && pad < text.size() && text[text.size() - 1 - pad] == '=') ++pad;
  for (std::size_t i = 0; i + pad < text.size(); ++i) {
    if (!valid_char(text[i])) throw Error(ErrorCode::BadRequest, "invalid base64 character");
  }
  std::string out(b64::decoded_size(text.size()), '\0');
  auto [written, read] = b64::decode(out.data(), text.data(), text.size());
  out.resize(written);
  return out;
}

}  // namespace slvideo
