#include "slvideo/annotation_store.hpp"

#include <algorithm>
#include <tuple>

#include "slvideo/eaf.hpp"
#include "slvideo/errors.hpp"
#include "slvideo/io.hpp"
#include "slvideo/text.hpp"

namespace slvideo {

namespace {

bool by_tier_then_time(const Annotation& x, const Annotation& y) {
  return std::tie(x.tier_id, x.start_ms, x.annotation_id) <
         std::tie(y.tier_id, y.start_ms, y.annotation_id);
}

nlohmann::json video_fps_json(const Fps& fps) {
  if (fps.den == 1) return fps.num;
  return format_fps(fps);
}

Fps fps_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return parse_fps(std::to_string(j.get<std::int64_t>()));
  if (j.is_number()) {
    // Six decimals covers the common NTSC rates written as decimals.
    auto v = j.get<double>();
    auto scaled = static_cast<std::int64_t>(v * 1'000'000.0 + 0.5);
    return parse_fps(std::to_string(scaled) + "/1000000");
  }
  return parse_fps(j.get<std::string>());
}

}  // namespace

std::string write_parsed_json(const std::vector<Annotation>& annotations,
                              const VideoRecord& video) {
  auto sorted = annotations;
  std::sort(sorted.begin(), sorted.end(), by_tier_then_time);
  auto arr = nlohmann::json::array();
  for (const auto& a : sorted) {
    if (a.video_id != video.video_id) {
      throw Error(ErrorCode::BadRequest, "annotation " + a.annotation_id + " belongs to " +
                                             a.video_id + ", not " + video.video_id);
    }
    arr.push_back(annotation_to_json(a));
  }
  nlohmann::json doc = {{"video_id", video.video_id},
                        {"media_path", video.media_path.generic_string()},
                        {"fps", video_fps_json(video.fps)},
                        {"duration_ms", video.duration_ms},
                        {"annotations", std::move(arr)}};
  return doc.dump(2) + "\n";
}

std::pair<VideoRecord, std::vector<Annotation>> read_parsed_json(std::string_view bytes) {
  try {
    auto j = nlohmann::json::parse(bytes);
    VideoRecord v;
    v.video_id = j.at("video_id").get<std::string>();
    v.media_path = j.value("media_path", std::string());
    v.fps = fps_from_json(j.at("fps"));
    v.duration_ms = j.at("duration_ms").get<std::int64_t>();
    std::vector<Annotation> anns;
    for (const auto& a : j.at("annotations")) anns.push_back(annotation_from_json(a, v.video_id));
    return {std::move(v), std::move(anns)};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("parsed annotation JSON: ") + e.what());
  }
}

AnnotationStore::AnnotationStore() : state_(std::make_shared<Snapshot>()) {}

AnnotationStore::AnnotationStore(std::filesystem::path overlay_path)
    : overlay_path_(std::move(overlay_path)), state_(std::make_shared<Snapshot>()) {
  load_overlay();
}

std::filesystem::path AnnotationStore::annotations_dir(const std::filesystem::path& store_dir) {
  return store_dir / "annotations";
}

std::filesystem::path AnnotationStore::overlay_file(const std::filesystem::path& store_dir) {
  return store_dir / "overlay.json";
}

std::unique_ptr<AnnotationStore> AnnotationStore::open(const std::filesystem::path& store_dir) {
  auto store = std::make_unique<AnnotationStore>(overlay_file(store_dir));
  auto dir = annotations_dir(store_dir);
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::ConfigInvalid, "no parsed annotations under " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto [video, anns] = read_parsed_json(read_file(f));
    store->add_video(std::move(video), std::move(anns));
  }
  return store;
}

std::shared_ptr<const AnnotationStore::Snapshot> AnnotationStore::snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return state_;
}

void AnnotationStore::publish(std::shared_ptr<Snapshot> next) {
  rebuild_effective(*next);
  std::lock_guard lock(snapshot_mu_);
  state_ = std::move(next);
}

void AnnotationStore::rebuild_effective(Snapshot& s) {
  s.effective.clear();
  s.by_key.clear();
  std::map<std::pair<std::string, std::string>, Annotation> merged;
  for (const auto& [vid, anns] : s.parsed) {
    for (const auto& [aid, a] : anns) merged[{vid, aid}] = a;
  }
  for (const auto& [vid, entries] : s.overlay) {
    for (const auto& [aid, entry] : entries) {
      if (entry.second) {
        merged.erase({vid, aid});
      } else {
        merged[{vid, aid}] = entry.first;
      }
    }
  }
  for (auto& [key, a] : merged) {
    auto norm = normalize_text(a.gloss);
    s.effective.push_back({std::move(a), std::move(norm)});
  }
  std::sort(s.effective.begin(), s.effective.end(), [](const Entry& x, const Entry& y) {
    const auto& a = x.annotation;
    const auto& b = y.annotation;
    return std::tie(a.video_id, a.start_ms, a.tier_id, a.annotation_id) <
           std::tie(b.video_id, b.start_ms, b.tier_id, b.annotation_id);
  });
  for (std::size_t i = 0; i < s.effective.size(); ++i) {
    const auto& a = s.effective[i].annotation;
    s.by_key[{a.video_id, a.annotation_id}] = i;
  }
}

void AnnotationStore::load_overlay() {
  if (overlay_path_.empty() || !std::filesystem::exists(overlay_path_)) return;
  auto next = std::make_shared<Snapshot>(*snapshot());
  try {
    auto j = nlohmann::json::parse(read_file(overlay_path_));
    for (const auto& e : j.at("annotations")) {
      auto a = annotation_from_json(e, e.at("video_id").get<std::string>());
      bool deleted = e.value("deleted", false);
      next->overlay[a.video_id][a.annotation_id] = {a, deleted};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid,
                "overlay " + overlay_path_.string() + ": " + e.what());
  }
  publish(std::move(next));
}

void AnnotationStore::persist_overlay(const Snapshot& s) const {
  if (overlay_path_.empty()) return;
  auto arr = nlohmann::json::array();
  for (const auto& [vid, entries] : s.overlay) {
    for (const auto& [aid, entry] : entries) {
      auto j = annotation_to_json(entry.first);
      j["video_id"] = vid;
      j["deleted"] = entry.second;
      arr.push_back(std::move(j));
    }
  }
  nlohmann::json doc = {{"annotations", std::move(arr)}};
  write_file_atomic(overlay_path_, doc.dump(2) + "\n");
}

void AnnotationStore::add_video(VideoRecord video, std::vector<Annotation> annotations) {
  if (!is_valid_id_component(video.video_id)) {
    throw Error(ErrorCode::InvalidIdentifier, "invalid video id '" + video.video_id + "'");
  }
  if (video.fps.num <= 0 || video.fps.den <= 0) {
    throw Error(ErrorCode::ConfigInvalid, "fps must be positive for " + video.video_id);
  }
  std::map<std::string, Annotation> by_id;
  std::int64_t max_end = 0;
  for (auto& a : annotations) {
    if (a.video_id != video.video_id) {
      throw Error(ErrorCode::BadRequest, "annotation " + a.annotation_id +
                                             " does not belong to " + video.video_id);
    }
    if (!is_valid_id_component(a.annotation_id)) {
      throw Error(ErrorCode::InvalidIdentifier,
                  "invalid annotation id '" + a.annotation_id + "'");
    }
    check_interval(a.start_ms, a.end_ms);
    max_end = std::max(max_end, a.end_ms);
    auto id = a.annotation_id;
    if (!by_id.emplace(id, std::move(a)).second) {
      throw Error(ErrorCode::MalformedEaf, "duplicate annotation id " + id);
    }
  }
  video.duration_ms = std::max({video.duration_ms, max_end, std::int64_t{1}});

  std::lock_guard writer(writer_mu_);
  auto next = std::make_shared<Snapshot>(*snapshot());
  next->parsed[video.video_id] = std::move(by_id);
  next->videos[video.video_id] = std::move(video);
  publish(std::move(next));
}

std::vector<VideoRecord> AnnotationStore::videos() const {
  auto s = snapshot();
  std::vector<VideoRecord> out;
  for (const auto& [id, v] : s->videos) out.push_back(v);
  return out;
}

VideoRecord AnnotationStore::video(std::string_view video_id) const {
  auto s = snapshot();
  auto it = s->videos.find(std::string(video_id));
  if (it == s->videos.end()) {
    throw Error(ErrorCode::UnknownVideo, "unknown video '" + std::string(video_id) + "'");
  }
  return it->second;
}

std::vector<Annotation> AnnotationStore::annotations(std::string_view video_id) const {
  auto s = snapshot();
  if (!s->videos.contains(std::string(video_id))) {
    throw Error(ErrorCode::UnknownVideo, "unknown video '" + std::string(video_id) + "'");
  }
  std::vector<Annotation> out;
  for (const auto& e : s->effective) {
    if (e.annotation.video_id == video_id) out.push_back(e.annotation);
  }
  std::sort(out.begin(), out.end(), by_tier_then_time);
  return out;
}

std::vector<Annotation> AnnotationStore::all_annotations() const {
  auto s = snapshot();
  std::vector<Annotation> out;
  out.reserve(s->effective.size());
  for (const auto& e : s->effective) out.push_back(e.annotation);
  return out;
}

std::optional<Annotation> AnnotationStore::find(std::string_view video_id,
                                                std::string_view annotation_id) const {
  auto s = snapshot();
  auto it = s->by_key.find({std::string(video_id), std::string(annotation_id)});
  if (it == s->by_key.end()) return std::nullopt;
  return s->effective[it->second].annotation;
}

Annotation AnnotationStore::upsert(Annotation ann) {
  check_interval(ann.start_ms, ann.end_ms);
  if (trim(ann.gloss).empty()) throw Error(ErrorCode::EmptyGloss, "gloss is empty");
  if (ann.tier_id.empty()) throw Error(ErrorCode::BadRequest, "tier_id is required");

  std::lock_guard writer(writer_mu_);
  auto next = std::make_shared<Snapshot>(*snapshot());
  if (!next->videos.contains(ann.video_id)) {
    throw Error(ErrorCode::UnknownVideo, "unknown video '" + ann.video_id + "'");
  }
  if (ann.annotation_id.empty()) {
    for (std::size_t n = 1;; ++n) {
      auto candidate = "u" + std::to_string(n);
      bool taken = (next->parsed.contains(ann.video_id) &&
                    next->parsed[ann.video_id].contains(candidate)) ||
                   (next->overlay.contains(ann.video_id) &&
                    next->overlay[ann.video_id].contains(candidate));
      if (!taken) {
        ann.annotation_id = candidate;
        break;
      }
    }
  }
  if (!is_valid_id_component(ann.annotation_id)) {
    throw Error(ErrorCode::InvalidIdentifier,
                "invalid annotation id '" + ann.annotation_id + "'");
  }

  auto existing = next->by_key.find({ann.video_id, ann.annotation_id});
  if (existing != next->by_key.end()) {
    const auto& current = next->effective[existing->second].annotation;
    if (ann.revision != current.revision) {
      throw Error(ErrorCode::ConcurrentEditConflict,
                  "annotation " + ann.annotation_id + " is at revision " +
                      std::to_string(current.revision) + ", edit was based on " +
                      std::to_string(ann.revision));
    }
    ann.revision = current.revision + 1;
    ann.origin = Origin::UserEdited;
  } else {
    ann.revision = 0;
    ann.origin = Origin::UserCreated;
  }
  next->overlay[ann.video_id][ann.annotation_id] = {ann, false};
  persist_overlay(*next);
  publish(std::move(next));
  return ann;
}

Annotation AnnotationStore::remove(std::string_view video_id, std::string_view annotation_id,
                                   std::uint32_t revision) {
  std::lock_guard writer(writer_mu_);
  auto next = std::make_shared<Snapshot>(*snapshot());
  auto it = next->by_key.find({std::string(video_id), std::string(annotation_id)});
  if (it == next->by_key.end()) {
    throw Error(ErrorCode::UnknownAnnotation, "unknown annotation " + std::string(video_id) +
                                                  "/" + std::string(annotation_id));
  }
  Annotation a = next->effective[it->second].annotation;
  if (a.revision != revision) {
    throw Error(ErrorCode::ConcurrentEditConflict,
                "annotation " + a.annotation_id + " is at revision " +
                    std::to_string(a.revision) + ", delete was based on " +
                    std::to_string(revision));
  }
  a.revision += 1;
  a.origin = Origin::UserEdited;
  next->overlay[a.video_id][a.annotation_id] = {a, true};
  persist_overlay(*next);
  publish(std::move(next));
  return a;
}

std::vector<Annotation> AnnotationStore::plain_text_lookup(std::string_view query) const {
  if (trim(query).empty()) throw Error(ErrorCode::EmptyQuery, "query is empty");
  auto needle = normalize_text(trim(query));
  auto s = snapshot();
  std::vector<Annotation> out;
  for (const auto& e : s->effective) {
    switch (e.annotation.tier_role) {
      case TierRole::FacialExpression:
      case TierRole::ManualGloss:
        if (e.normalized_gloss == needle) out.push_back(e.annotation);
        break;
      case TierRole::Translation:
        if (e.normalized_gloss.find(needle) != std::string::npos) out.push_back(e.annotation);
        break;
      case TierRole::Other:
        break;
    }
  }
  return out;
}

std::string AnnotationStore::export_eaf(std::string_view video_id) const {
  return write_eaf(annotations(video_id), video(video_id));
}

void AnnotationStore::save_parsed(const std::filesystem::path& store_dir) const {
  auto s = snapshot();
  auto dir = annotations_dir(store_dir);
  std::filesystem::create_directories(dir);
  for (const auto& [vid, video] : s->videos) {
    std::vector<Annotation> anns;
    if (auto it = s->parsed.find(vid); it != s->parsed.end()) {
      for (const auto& [aid, a] : it->second) anns.push_back(a);
    }
    write_file_atomic(dir / (vid + ".json"), write_parsed_json(anns, video));
  }
}

}  // namespace slvideo
