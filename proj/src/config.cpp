#include "slvideo/config.hpp"

#include "slvideo/errors.hpp"
#include "slvideo/io.hpp"

namespace slvideo {

std::filesystem::path Config::frames() const {
  return frames_dir.empty() ? store_dir / "frames" : frames_dir;
}

std::filesystem::path Config::index() const {
  return index_path.empty() ? store_dir / "index.bin" : index_path;
}

std::filesystem::path Config::tiers() const {
  return tier_config.empty() ? store_dir / "tier_config.json" : tier_config;
}

std::filesystem::path Config::segments() const { return store_dir / "segments.json"; }

Config Config::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  auto resolve = [&](const std::string& p) -> std::filesystem::path {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  try {
    Config c;
    if (j.contains("store_dir")) c.store_dir = resolve(j["store_dir"].get<std::string>());
    c.frames_dir = resolve(j.value("frames_dir", std::string()));
    c.index_path = resolve(j.value("index_path", std::string()));
    c.tier_config = resolve(j.value("tier_config", std::string()));
    if (j.contains("encoder")) {
      const auto& e = j["encoder"];
      c.encoder.kind = encoder_kind_from_string(e.value("kind", std::string("mock")));
      c.encoder.endpoint = e.value("endpoint", std::string());
      c.encoder.model_name = e.value("model_name", c.encoder.model_name);
      c.encoder.dim = e.value("dim", c.encoder.dim);
      c.encoder.batch_size = e.value("batch_size", c.encoder.batch_size);
    }
    c.k_default = j.value("k_default", c.k_default);
    if (j.contains("eval")) {
      c.eval.k = j["eval"].value("k", c.eval.k);
      c.eval.median_over_seven = j["eval"].value("median_over_seven", c.eval.median_over_seven);
    }
    if (j.contains("workers")) {
      const auto& w = j["workers"];
      c.extract.workers = w.value("extract", c.extract.workers);
      c.http_workers = w.value("http", c.http_workers);
      c.eval.workers = w.value("eval", c.eval.workers);
    }
    if (j.contains("extract")) {
      c.extract.extract_template = j["extract"].value("template", c.extract.extract_template);
      c.extract.pipeline.commands =
          j["extract"].value("preprocess", std::vector<std::string>{});
    }
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    if (c.k_default == 0) throw Error(ErrorCode::ConfigInvalid, "k_default must be positive");
    if (c.encoder.dim == 0) throw Error(ErrorCode::ConfigInvalid, "encoder.dim must be positive");
    if (c.encoder.kind == EncoderKind::Remote && c.encoder.endpoint.empty()) {
      throw Error(ErrorCode::ConfigInvalid, "remote encoder needs encoder.endpoint");
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("config: ") + e.what());
  }
}

Config Config::load(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, "config " + path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigInvalid, e.what());
  }
  return from_json(j, path.parent_path());
}

nlohmann::json Config::to_json() const {
  return {{"store_dir", store_dir.generic_string()},
          {"frames_dir", frames().generic_string()},
          {"index_path", index().generic_string()},
          {"tier_config", tiers().generic_string()},
          {"encoder",
           {{"kind", std::string(to_string(encoder.kind))},
            {"endpoint", encoder.endpoint},
            {"model_name", encoder.model_name},
            {"dim", encoder.dim},
            {"batch_size", encoder.batch_size}}},
          {"k_default", k_default},
          {"eval", {{"k", eval.k}, {"median_over_seven", eval.median_over_seven}}},
          {"workers",
           {{"extract", extract.workers}, {"http", http_workers}, {"eval", eval.workers}}},
          {"extract",
           {{"template", extract.extract_template}, {"preprocess", extract.pipeline.commands}}},
          {"host", host},
          {"port", port}};
}

}  // namespace slvideo
