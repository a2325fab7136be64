#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "slvideo/encoder.hpp"
#include "slvideo/eval_harness.hpp"
#include "slvideo/segmenter.hpp"

namespace slvideo {

// Service and CLI configuration. Relative paths in a config file are resolved
// against the file's directory. Unset paths default to the store layout:
//   <store>/annotations/*.json  parsed annotations
//   <store>/overlay.json        edit overlay
//   <store>/segments.json       planned + extracted segments
//   <store>/tier_config.json    tier role patterns used at ingest
//   <store>/index.bin           vector index
//   <store>/frames/             extracted keyframes
struct Config {
  std::filesystem::path store_dir = "store";
  std::filesystem::path frames_dir;
  std::filesystem::path index_path;
  std::filesystem::path tier_config;
  EncoderConfig encoder;
  std::size_t k_default = kDefaultTopK;
  EvalOptions eval;
  ExtractOptions extract;
  unsigned http_workers = 8;
  std::string host = "127.0.0.1";
  int port = 8080;

  std::filesystem::path frames() const;
  std::filesystem::path index() const;
  std::filesystem::path tiers() const;
  std::filesystem::path segments() const;

  static Config from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  // Throws ConfigInvalid.
  static Config load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

inline constexpr const char* kConfigEnvVar = "SLVIDEO_CONFIG";

}  // namespace slvideo
