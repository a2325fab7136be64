#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slvideo/annotation_store.hpp"
#include "slvideo/embedding.hpp"
#include "slvideo/encoder.hpp"
#include "slvideo/vector_index.hpp"

namespace slvideo {

enum class SearchMode {
  TextPlain,
  FrameBase,
  FrameAverage,
  FrameBest,
  FrameSummed,
  FrameAll,
  Annotation,
  Combined,
};

inline constexpr std::array<SearchMode, 8> kAllModes = {
    SearchMode::TextPlain,   SearchMode::FrameBase, SearchMode::FrameAverage,
    SearchMode::FrameBest,   SearchMode::FrameSummed, SearchMode::FrameAll,
    SearchMode::Annotation,  SearchMode::Combined};

inline constexpr std::size_t kDefaultTopK = 10;

// Canonical names: plain, base, average, best, summed, all, annotation,
// combined. Parsing also accepts text_plain and frame_* spellings.
std::string_view to_string(SearchMode mode);
SearchMode search_mode_from_string(std::string_view name);  // throws UnknownMode

// Index fields queried by an embedding mode (empty for TextPlain).
std::vector<Field> fields_for(SearchMode mode);
bool is_frame_mode(SearchMode mode);

struct SearchRequest {
  SearchMode mode = SearchMode::Annotation;
  std::optional<std::string> query_text;
  std::optional<std::string> query_doc_id;
  std::size_t k = kDefaultTopK;
  std::optional<Field> field_override;
};

struct SearchResult {
  std::string doc_id;
  std::string video_id;
  std::string annotation_id;
  std::string gloss;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  double score = 0.0;
  std::size_t rank = 0;

  bool operator==(const SearchResult&) const = default;
};

nlohmann::json result_to_json(const SearchResult& r);
nlohmann::json results_to_json(const std::vector<SearchResult>& rs);

// Stateless over the store and index it references; safe for concurrent use
// when the encoder is.
class QueryEngine {
 public:
  QueryEngine(const AnnotationStore& store, const VectorIndex& index, Encoder& encoder);

  // Text query in any mode. Throws EmptyQuery, EncoderUnavailable, BadRequest.
  std::vector<SearchResult> search_text(const SearchRequest& req) const;

  // Thesaurus: the stored vector of doc_id is the query; doc_id itself is
  // excluded. Throws UnknownDocument.
  std::vector<SearchResult> search_similar(std::string_view doc_id, Field field = Field::All,
                                           std::size_t k = kDefaultTopK) const;

  // Dispatches on req.query_doc_id / req.query_text.
  std::vector<SearchResult> search(const SearchRequest& req) const;

  // Joins hits with annotation metadata. Stale hits (annotation gone) are
  // dropped, reported through *warnings, and ranks re-compacted.
  std::vector<SearchResult> hydrate(std::span<const SearchHit> hits,
                                    std::vector<std::string>* warnings = nullptr) const;

  const AnnotationStore& store() const { return store_; }
  const VectorIndex& index() const { return index_; }
  Encoder& encoder() const { return encoder_; }

 private:
  const AnnotationStore& store_;
  const VectorIndex& index_;
  Encoder& encoder_;
};

}  // namespace slvideo
