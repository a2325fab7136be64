#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "slvideo/annotation_store.hpp"
#include "slvideo/config.hpp"
#include "slvideo/encoder.hpp"
#include "slvideo/segmenter.hpp"
#include "slvideo/vector_index.hpp"

namespace slvideo {

// Pre-processing and indexing phase, corpus-wide.

struct IngestOptions {
  std::filesystem::path eaf_dir;
  std::filesystem::path video_dir;
  std::filesystem::path tier_config;
  std::filesystem::path store_dir;
  Fps default_fps{25, 1};
};

struct IngestSummary {
  std::size_t videos = 0;
  std::size_t annotations = 0;
  std::size_t facial_expression = 0;
  std::vector<std::string> warnings;
};

// Parses every *.eaf in eaf_dir into <store>/annotations/<video_id>.json and
// copies the tier config into the store. Media, fps and duration come from
// <video_dir>/videos.json when present ({"<video_id>": {"media", "fps",
// "duration_ms"}}), otherwise from the first file in video_dir sharing the EAF
// stem, the default fps and the last annotation end. Video ids are file stems
// with '_' replaced by '-'.
IngestSummary ingest_corpus(const IngestOptions& options);

std::string video_id_from_stem(std::string_view stem);

// Keyframe plans for every facial-expression annotation, in store order.
std::vector<Segment> plan_corpus(const AnnotationStore& store);

void write_segments(const std::filesystem::path& path, const std::vector<Segment>& segments);
std::vector<Segment> read_segments(const std::filesystem::path& path);

// Plans and extracts all segments; writes the segments manifest.
std::vector<Segment> extract_corpus(const AnnotationStore& store, const Config& config);

// One document per extracted segment whose annotation still exists.
// Segments without frames are skipped with a warning.
std::vector<SignEmbeddings> build_documents(const AnnotationStore& store,
                                            const std::vector<Segment>& segments,
                                            Encoder& encoder,
                                            std::vector<std::string>* warnings = nullptr);

// Builds a fresh index from the segments manifest and persists it.
std::unique_ptr<VectorIndex> index_corpus(const AnnotationStore& store, const Config& config,
                                          Encoder& encoder,
                                          std::vector<std::string>* warnings = nullptr);

}  // namespace slvideo
