#include "slvideo/service.hpp"

#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "slvideo/annotation_store.hpp"
#include "slvideo/pipeline.hpp"
#include "slvideo/query_engine.hpp"
#include "slvideo/text.hpp"
#include "slvideo/vector_index.hpp"

namespace slvideo {

nlohmann::json api_error_json(ErrorCode code, const std::string& message) {
  return {{"code", std::string(error_code_name(code))},
          {"message", message},
          {"http_status", error_http_status(code)}};
}

namespace {

void reply_json(httplib::Response& res, const nlohmann::json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void reply_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  reply_json(res, api_error_json(code, message), error_http_status(code));
}

// Runs a handler, mapping exceptions onto the error envelope.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      reply_error(res, e.code(), e.what());
    } catch (const nlohmann::json::exception& e) {
      reply_error(res, ErrorCode::BadRequest, e.what());
    } catch (const std::exception& e) {
      reply_error(res, ErrorCode::Internal, e.what());
    }
  };
}

nlohmann::json parse_body(const httplib::Request& req) {
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("request body is not JSON: ") + e.what());
  }
}

std::size_t parse_k(const std::string& s) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used != s.size() || v <= 0) throw std::invalid_argument("k");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw Error(ErrorCode::BadRequest, "k must be a positive integer");
  }
}

nlohmann::json video_json(const VideoRecord& v) {
  return {{"video_id", v.video_id},
          {"media_path", v.media_path.generic_string()},
          {"fps", format_fps(v.fps)},
          {"duration_ms", v.duration_ms}};
}

nlohmann::json annotation_with_video(const Annotation& a) {
  auto j = annotation_to_json(a);
  j["video_id"] = a.video_id;
  return j;
}

int bind_server(httplib::Server& server, const std::string& host, int port) {
  if (port == 0) {
    int bound = server.bind_to_any_port(host);
    if (bound <= 0) throw Error(ErrorCode::BindFailure, "cannot bind " + host);
    return bound;
  }
  if (!server.bind_to_port(host, port)) {
    throw Error(ErrorCode::BindFailure, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

}  // namespace

struct Service::Impl {
  Config config;
  std::shared_ptr<Encoder> encoder;
  std::unique_ptr<AnnotationStore> store;
  std::unique_ptr<VectorIndex> index;
  std::unique_ptr<QueryEngine> engine;
  std::optional<TierRoleConfig> tiers;

  std::mutex segments_mu;
  std::map<std::string, std::vector<std::filesystem::path>> frames_by_doc;
  std::mutex reindex_mu;

  httplib::Server server;
  std::jthread thread;

  void load_segments() {
    std::map<std::string, std::vector<std::filesystem::path>> frames;
    if (std::filesystem::exists(config.segments())) {
      for (auto& s : read_segments(config.segments())) frames[s.doc_id()] = s.frame_paths;
    }
    std::lock_guard lock(segments_mu);
    frames_by_doc = std::move(frames);
  }

  Annotation annotation_from_request(const nlohmann::json& body, std::string video_id,
                                     std::string annotation_id) const {
    Annotation a;
    a.video_id = video_id.empty() ? body.at("video_id").get<std::string>() : std::move(video_id);
    a.annotation_id = annotation_id.empty() ? body.value("annotation_id", std::string())
                                            : std::move(annotation_id);
    a.tier_id = body.at("tier_id").get<std::string>();
    if (body.contains("tier_role")) {
      a.tier_role = tier_role_from_string(body["tier_role"].get<std::string>());
    } else {
      a.tier_role = tiers ? tiers->resolve(a.tier_id) : TierRole::Other;
    }
    a.gloss = body.at("gloss").get<std::string>();
    a.start_ms = body.at("start_ms").get<std::int64_t>();
    a.end_ms = body.at("end_ms").get<std::int64_t>();
    a.revision = body.value("revision", 0u);
    return a;
  }

  void routes() {
    server.Get("/health", guarded([this](const httplib::Request&, httplib::Response& res) {
      reply_json(res, {{"status", "ok"},
                       {"doc_count", index->meta().doc_count},
                       {"encoder",
                        {{"kind", std::string(to_string(encoder->kind()))},
                         {"dim", encoder->dim()},
                         {"model", encoder->model_name()}}}});
    }));

    server.Get("/videos", guarded([this](const httplib::Request&, httplib::Response& res) {
      auto arr = nlohmann::json::array();
      for (const auto& v : store->videos()) arr.push_back(video_json(v));
      reply_json(res, arr);
    }));

    server.Get("/videos/:video_id/annotations",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 auto arr = nlohmann::json::array();
                 for (const auto& a : store->annotations(req.path_params.at("video_id"))) {
                   arr.push_back(annotation_with_video(a));
                 }
                 reply_json(res, arr);
               }));

    server.Get("/videos/:video_id/eaf",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 res.set_content(store->export_eaf(req.path_params.at("video_id")),
                                 "application/xml; charset=utf-8");
               }));

    server.Post("/search", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto body = parse_body(req);
      SearchRequest sr;
      sr.mode = search_mode_from_string(body.value("mode", std::string("annotation")));
      sr.query_text = body.value("query", std::string());
      sr.k = body.value("k", config.k_default);
      if (sr.k == 0) throw Error(ErrorCode::BadRequest, "k must be positive");
      reply_json(res, results_to_json(engine->search_text(sr)));
    }));

    server.Get("/similar/:doc_id",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 Field field = Field::All;
                 if (req.has_param("field")) field = field_from_string(req.get_param_value("field"));
                 std::size_t k = config.k_default;
                 if (req.has_param("k")) k = parse_k(req.get_param_value("k"));
                 reply_json(res,
                            results_to_json(engine->search_similar(req.path_params.at("doc_id"), field, k)));
               }));

    server.Post("/annotations",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  auto a = annotation_from_request(parse_body(req), "", "");
                  reply_json(res, annotation_with_video(store->upsert(std::move(a))), 201);
                }));

    server.Put("/annotations/:video_id/:annotation_id",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 auto body = parse_body(req);
                 auto a = annotation_from_request(body, req.path_params.at("video_id"),
                                                  req.path_params.at("annotation_id"));
                 if (!body.contains("revision") && store->find(a.video_id, a.annotation_id)) {
                   throw Error(ErrorCode::BadRequest, "editing requires the base revision");
                 }
                 reply_json(res, annotation_with_video(store->upsert(std::move(a))));
               }));

    server.Delete("/annotations/:video_id/:annotation_id",
                  guarded([this](const httplib::Request& req, httplib::Response& res) {
                    if (!req.has_param("revision")) {
                      throw Error(ErrorCode::BadRequest, "delete requires ?revision=N");
                    }
                    auto rev = static_cast<std::uint32_t>(std::stoul(req.get_param_value("revision")));
                    auto a = store->remove(req.path_params.at("video_id"),
                                           req.path_params.at("annotation_id"), rev);
                    auto j = annotation_with_video(a);
                    j["deleted"] = true;
                    reply_json(res, j);
                  }));

    server.Post("/admin/reindex",
                guarded([this](const httplib::Request&, httplib::Response& res) {
                  std::lock_guard lock(reindex_mu);
                  std::vector<std::string> warnings;
                  auto docs = build_documents(*store, read_segments(config.segments()), *encoder,
                                              &warnings);
                  index->replace_all(docs);
                  index->persist(config.index());
                  load_segments();
                  reply_json(res, {{"doc_count", index->meta().doc_count}, {"warnings", warnings}});
                }));

    server.Get("/segments/:doc_id/frames",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto& doc_id = req.path_params.at("doc_id");
                 std::lock_guard lock(segments_mu);
                 auto it = frames_by_doc.find(doc_id);
                 if (it == frames_by_doc.end()) {
                   throw Error(ErrorCode::UnknownDocument, "no segment '" + doc_id + "'");
                 }
                 auto arr = nlohmann::json::array();
                 for (const auto& p : it->second) arr.push_back("/frames/" + p.filename().string());
                 reply_json(res, arr);
               }));

    if (std::filesystem::is_directory(config.frames())) {
      server.set_mount_point("/frames", config.frames().string());
    }
  }
};

Service::Service(Config config)
    : Service(config, std::shared_ptr<Encoder>(make_encoder(config.encoder))) {}

Service::Service(Config config, std::shared_ptr<Encoder> encoder) : impl_(std::make_unique<Impl>()) {
  auto& s = *impl_;
  s.config = std::move(config);
  s.encoder = std::move(encoder);
  s.store = AnnotationStore::open(s.config.store_dir);
  if (std::filesystem::exists(s.config.tiers())) s.tiers = TierRoleConfig::load(s.config.tiers());
  if (std::filesystem::exists(s.config.index())) {
    s.index = VectorIndex::load(s.config.index());
    if (s.index->dim() != s.encoder->dim()) {
      throw Error(ErrorCode::ConfigInvalid, "index dim " + std::to_string(s.index->dim()) +
                                                " differs from encoder dim " +
                                                std::to_string(s.encoder->dim()));
    }
  } else {
    s.index = std::make_unique<VectorIndex>(s.encoder->dim());
  }
  s.engine = std::make_unique<QueryEngine>(*s.store, *s.index, *s.encoder);
  s.load_segments();
  auto workers = std::max(1u, s.config.http_workers);
  s.server.new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
  s.routes();
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) { return bind_server(impl_->server, host, port); }

void Service::listen() { impl_->server.listen_after_bind(); }

int Service::start(const std::string& host, int port) {
  int bound = bind(host, port);
  impl_->thread = std::jthread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void Service::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

struct EncoderProtocolServer::Impl {
  std::shared_ptr<Encoder> encoder;
  std::size_t max_batch;
  httplib::Server server;
  std::jthread thread;

  static void protocol_error(httplib::Response& res, int status, const std::string& code,
                             const std::string& message) {
    reply_json(res, {{"code", code}, {"message", message}, {"http_status", status}}, status);
  }

  nlohmann::json vectors_reply(const std::vector<Embedding>& vs) const {
    auto arr = nlohmann::json::array();
    for (const auto& v : vs) arr.push_back(std::vector<double>(v.values().begin(), v.values().end()));
    return {{"model", encoder->model_name()}, {"dim", encoder->dim()}, {"vectors", std::move(arr)}};
  }

  void routes() {
    server.Get("/v1/info", [this](const httplib::Request&, httplib::Response& res) {
      reply_json(res, {{"model", encoder->model_name()}, {"dim", encoder->dim()}});
    });
    server.Post("/v1/encode_text", [this](const httplib::Request& req, httplib::Response& res) {
      std::vector<std::string> texts;
      try {
        texts = nlohmann::json::parse(req.body).at("texts").get<std::vector<std::string>>();
      } catch (const nlohmann::json::exception& e) {
        return protocol_error(res, 400, "bad_request", e.what());
      }
      if (texts.size() > max_batch) return protocol_error(res, 413, "batch_too_large", "too many texts");
      reply_json(res, vectors_reply(encoder->encode_texts(texts)));
    });
    server.Post("/v1/encode_image", [this](const httplib::Request& req, httplib::Response& res) {
      std::vector<std::string> encoded;
      try {
        encoded = nlohmann::json::parse(req.body).at("images_b64").get<std::vector<std::string>>();
      } catch (const nlohmann::json::exception& e) {
        return protocol_error(res, 400, "bad_request", e.what());
      }
      if (encoded.size() > max_batch) {
        return protocol_error(res, 413, "batch_too_large", "too many images");
      }
      std::vector<std::string> images;
      images.reserve(encoded.size());
      for (const auto& e : encoded) {
        try {
          images.push_back(base64_decode(e));
        } catch (const Error& err) {
          return protocol_error(res, 400, "bad_image", err.what());
        }
      }
      reply_json(res, vectors_reply(encoder->encode_images(images)));
    });
  }
};

EncoderProtocolServer::EncoderProtocolServer(std::shared_ptr<Encoder> encoder, std::size_t max_batch)
    : impl_(std::make_unique<Impl>()) {
  impl_->encoder = std::move(encoder);
  impl_->max_batch = max_batch;
  impl_->routes();
}

EncoderProtocolServer::~EncoderProtocolServer() { stop(); }

int EncoderProtocolServer::bind(const std::string& host, int port) {
  return bind_server(impl_->server, host, port);
}

void EncoderProtocolServer::listen() { impl_->server.listen_after_bind(); }

int EncoderProtocolServer::start(const std::string& host, int port) {
  int bound = bind(host, port);
  impl_->thread = std::jthread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void EncoderProtocolServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace slvideo
