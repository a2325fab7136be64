#include "slvideo/pipeline.hpp"

#include <algorithm>
#include <map>

#include "slvideo/eaf.hpp"
#include "slvideo/errors.hpp"
#include "slvideo/io.hpp"

namespace slvideo {

namespace fs = std::filesystem;

std::string video_id_from_stem(std::string_view stem) {
  std::string id(stem);
  std::replace(id.begin(), id.end(), kDocIdSeparator, '-');
  return id;
}

namespace {

struct VideoMeta {
  fs::path media;
  std::optional<Fps> fps;
  std::optional<std::int64_t> duration_ms;
};

std::map<std::string, VideoMeta> read_video_manifest(const fs::path& video_dir) {
  std::map<std::string, VideoMeta> out;
  auto manifest = video_dir / "videos.json";
  if (!fs::exists(manifest)) return out;
  try {
    auto j = nlohmann::json::parse(read_file(manifest));
    for (const auto& [id, e] : j.items()) {
      VideoMeta m;
      if (e.contains("media")) {
        fs::path p = e["media"].get<std::string>();
        m.media = p.is_absolute() ? p : video_dir / p;
      }
      if (e.contains("fps")) {
        m.fps = e["fps"].is_string() ? parse_fps(e["fps"].get<std::string>())
                                     : parse_fps(e["fps"].dump());
      }
      if (e.contains("duration_ms")) m.duration_ms = e["duration_ms"].get<std::int64_t>();
      out[id] = std::move(m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, manifest.string() + ": " + e.what());
  }
  return out;
}

fs::path find_media(const fs::path& video_dir, const std::string& stem) {
  if (video_dir.empty() || !fs::is_directory(video_dir)) return {};
  std::vector<fs::path> candidates;
  for (const auto& e : fs::directory_iterator(video_dir)) {
    if (e.is_regular_file() && e.path().stem() == stem && e.path().extension() != ".eaf" &&
        e.path().extension() != ".json") {
      candidates.push_back(e.path());
    }
  }
  std::sort(candidates.begin(), candidates.end());
  return candidates.empty() ? fs::path{} : candidates.front();
}

}  // namespace

IngestSummary ingest_corpus(const IngestOptions& options) {
  if (!fs::is_directory(options.eaf_dir)) {
    throw Error(ErrorCode::ConfigInvalid, "EAF directory not found: " + options.eaf_dir.string());
  }
  auto config = TierRoleConfig::load(options.tier_config);
  auto manifest = read_video_manifest(options.video_dir);

  std::vector<fs::path> eafs;
  for (const auto& e : fs::directory_iterator(options.eaf_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".eaf") eafs.push_back(e.path());
  }
  std::sort(eafs.begin(), eafs.end());

  AnnotationStore store;
  IngestSummary summary;
  for (const auto& path : eafs) {
    auto stem = path.stem().string();
    auto video_id = video_id_from_stem(stem);
    auto anns = parse_eaf(read_file(path), video_id, config, &summary.warnings);

    VideoRecord video;
    video.video_id = video_id;
    auto meta = manifest.contains(video_id) ? manifest[video_id]
                                            : (manifest.contains(stem) ? manifest[stem] : VideoMeta{});
    video.media_path = meta.media.empty() ? find_media(options.video_dir, stem) : meta.media;
    if (video.media_path.empty()) {
      summary.warnings.push_back("no media found for video " + video_id);
    }
    video.fps = meta.fps.value_or(options.default_fps);
    std::int64_t max_end = 1;
    for (const auto& a : anns) max_end = std::max(max_end, a.end_ms);
    video.duration_ms = std::max(meta.duration_ms.value_or(max_end), max_end);

    summary.videos += 1;
    summary.annotations += anns.size();
    summary.facial_expression += static_cast<std::size_t>(std::count_if(
        anns.begin(), anns.end(),
        [](const Annotation& a) { return a.tier_role == TierRole::FacialExpression; }));
    store.add_video(std::move(video), std::move(anns));
  }

  fs::create_directories(options.store_dir);
  store.save_parsed(options.store_dir);
  write_file_atomic(options.store_dir / "tier_config.json", config.to_json().dump(2) + "\n");
  return summary;
}

std::vector<Segment> plan_corpus(const AnnotationStore& store) {
  auto snap = store.snapshot();
  std::vector<Segment> out;
  for (const auto& e : snap->effective) {
    const auto& a = e.annotation;
    if (a.tier_role != TierRole::FacialExpression) continue;
    out.push_back(plan_keyframes(a, snap->videos.at(a.video_id).fps));
  }
  return out;
}

void write_segments(const fs::path& path, const std::vector<Segment>& segments) {
  auto arr = nlohmann::json::array();
  for (const auto& s : segments) arr.push_back(segment_to_json(s));
  write_file_atomic(path, nlohmann::json{{"segments", arr}}.dump(2) + "\n");
}

std::vector<Segment> read_segments(const fs::path& path) {
  if (!fs::exists(path)) {
    throw Error(ErrorCode::ConfigInvalid,
                "no segments manifest at " + path.string() + " (run extract-frames first)");
  }
  try {
    auto j = nlohmann::json::parse(read_file(path));
    std::vector<Segment> out;
    for (const auto& s : j.at("segments")) out.push_back(segment_from_json(s));
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, path.string() + ": " + e.what());
  }
}

std::vector<Segment> extract_corpus(const AnnotationStore& store, const Config& config) {
  auto planned = plan_corpus(store);
  auto extracted = extract_all(planned, store.videos(), config.frames(), config.extract);
  write_segments(config.segments(), extracted);
  return extracted;
}

std::vector<SignEmbeddings> build_documents(const AnnotationStore& store,
                                            const std::vector<Segment>& segments,
                                            Encoder& encoder, std::vector<std::string>* warnings) {
  auto warn = [&](std::string msg) {
    if (warnings) {
      warnings->push_back(std::move(msg));
    } else {
      log_warning(msg);
    }
  };
  std::vector<SignEmbeddings> docs;
  docs.reserve(segments.size());
  for (const auto& seg : segments) {
    auto ann = store.find(seg.video_id, seg.annotation_id);
    if (!ann) {
      warn("segment " + seg.doc_id() + " has no live annotation; skipped");
      continue;
    }
    if (ann->tier_role != TierRole::FacialExpression) continue;
    if (seg.frame_paths.empty()) {
      warn("segment " + seg.doc_id() + " has no extracted frames; skipped");
      continue;
    }
    if (ann->start_ms != seg.start_ms || ann->end_ms != seg.end_ms) {
      warn("segment " + seg.doc_id() + " was edited after extraction; frames may be stale");
    }
    docs.push_back(build_sign_embeddings(encoder, seg, ann->gloss));
  }
  return docs;
}

std::unique_ptr<VectorIndex> index_corpus(const AnnotationStore& store, const Config& config,
                                          Encoder& encoder, std::vector<std::string>* warnings) {
  auto segments = read_segments(config.segments());
  auto docs = build_documents(store, segments, encoder, warnings);
  auto index = std::make_unique<VectorIndex>(encoder.dim());
  index->replace_all(docs);
  index->persist(config.index());
  return index;
}

}  // namespace slvideo
