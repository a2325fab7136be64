#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slvideo/annotation.hpp"

namespace slvideo {

// Deterministic, key-sorted parsed-annotation JSON for one video.
std::string write_parsed_json(const std::vector<Annotation>& annotations,
                              const VideoRecord& video);
std::pair<VideoRecord, std::vector<Annotation>> read_parsed_json(std::string_view bytes);

// Parsed annotations for every video plus a JSON edit overlay. Source files are
// never rewritten by edits; the overlay is persisted before an edit returns.
//
// Readers work against immutable snapshots and never block on writers. Writes
// are serialized.
class AnnotationStore {
 public:
  struct Entry {
    Annotation annotation;
    std::string normalized_gloss;
  };

  struct Snapshot {
    std::map<std::string, VideoRecord> videos;
    std::map<std::string, std::map<std::string, Annotation>> parsed;
    // Overlay entries: annotation plus deleted flag.
    std::map<std::string, std::map<std::string, std::pair<Annotation, bool>>> overlay;
    // Effective (parsed + overlay, without deleted), sorted by (video_id, start_ms,
    // tier_id, annotation_id).
    std::vector<Entry> effective;
    std::map<std::pair<std::string, std::string>, std::size_t> by_key;
  };

  // In-memory store; edits are not persisted.
  AnnotationStore();
  // Edits persisted to overlay_path (created on first edit, loaded if present).
  explicit AnnotationStore(std::filesystem::path overlay_path);

  // Loads <dir>/annotations/*.json and <dir>/overlay.json.
  static std::unique_ptr<AnnotationStore> open(const std::filesystem::path& store_dir);
  static std::filesystem::path annotations_dir(const std::filesystem::path& store_dir);
  static std::filesystem::path overlay_file(const std::filesystem::path& store_dir);

  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  // Replaces the parsed annotations for a video (ingest). Overlay entries for
  // the video survive.
  void add_video(VideoRecord video, std::vector<Annotation> annotations);

  std::shared_ptr<const Snapshot> snapshot() const;

  std::vector<VideoRecord> videos() const;
  VideoRecord video(std::string_view video_id) const;
  // Effective annotations for one video, sorted by (tier_id, start_ms).
  std::vector<Annotation> annotations(std::string_view video_id) const;
  std::vector<Annotation> all_annotations() const;
  std::optional<Annotation> find(std::string_view video_id,
                                 std::string_view annotation_id) const;

  // Creates (unknown id) or edits (known id; ann.revision must equal the stored
  // revision). An empty annotation_id gets a fresh "u<n>" id.
  Annotation upsert(Annotation ann);
  // Marks an annotation deleted in the overlay. Same revision check as upsert.
  Annotation remove(std::string_view video_id, std::string_view annotation_id,
                    std::uint32_t revision);

  std::vector<Annotation> plain_text_lookup(std::string_view query) const;

  std::string export_eaf(std::string_view video_id) const;

  void save_parsed(const std::filesystem::path& store_dir) const;

 private:
  void load_overlay();
  void persist_overlay(const Snapshot& s) const;
  void publish(std::shared_ptr<Snapshot> next);
  static void rebuild_effective(Snapshot& s);

  std::filesystem::path overlay_path_;
  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const Snapshot> state_;
  std::mutex writer_mu_;
};

}  // namespace slvideo
