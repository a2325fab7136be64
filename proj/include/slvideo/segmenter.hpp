#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "slvideo/annotation.hpp"

namespace slvideo {

struct Segment {
  std::string video_id;
  std::string annotation_id;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::vector<std::int64_t> frame_timestamps_ms;
  std::vector<std::filesystem::path> frame_paths;  // empty until extracted

  std::string doc_id() const { return make_doc_id(video_id, annotation_id); }
  bool operator==(const Segment&) const = default;
};

nlohmann::json segment_to_json(const Segment& s);
Segment segment_from_json(const nlohmann::json& j);

// Every native frame tick round(k * 1000 / fps) inside [start_ms, end_ms];
// a single keyframe at start_ms when no tick falls inside.
// Throws NotFacialExpressionTier or InvalidInterval.
Segment plan_keyframes(const Annotation& ann, const Fps& fps);

// Tick computation on its own, for callers that only have an interval.
std::vector<std::int64_t> keyframe_timestamps(std::int64_t start_ms, std::int64_t end_ms,
                                              const Fps& fps);

// Placeholders: {media}, {timestamp_ms}, {out}. Values are shell-quoted.
inline constexpr const char* kDefaultExtractTemplate =
    "ffmpeg -nostdin -loglevel error -y -ss {timestamp_ms}ms -i {media} -frames:v 1 {out}";

// Ordered image-to-image commands with {in} and {out} placeholders.
// Empty pipeline is the identity.
struct PreprocessPipeline {
  std::vector<std::string> commands;
};

struct ExtractOptions {
  std::string extract_template = kDefaultExtractTemplate;
  PreprocessPipeline pipeline;
  unsigned workers = 1;
};

std::string frame_file_name(const Segment& seg, std::int64_t timestamp_ms);

// Writes <video_id>_<annotation_id>_<timestamp_ms>.png per timestamp into
// out_dir and returns the segment with frame_paths filled.
// Throws MediaMissing, ExtractionFailed or PipelineFailed.
Segment extract_frames(const Segment& seg, const VideoRecord& video,
                       const std::filesystem::path& out_dir, const ExtractOptions& options);

// Extracts many segments with options.workers threads. Order preserved.
std::vector<Segment> extract_all(const std::vector<Segment>& segments,
                                 const std::vector<VideoRecord>& videos,
                                 const std::filesystem::path& out_dir,
                                 const ExtractOptions& options);

// Substitutes {name} placeholders with shell-quoted values.
std::string expand_command(std::string_view tmpl,
                           const std::vector<std::pair<std::string, std::string>>& values);

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};
CommandResult run_command(const std::string& command);

}  // namespace slvideo
