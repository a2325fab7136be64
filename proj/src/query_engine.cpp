#include "slvideo/query_engine.hpp"

#include "slvideo/errors.hpp"
#include "slvideo/text.hpp"

namespace slvideo {

std::string_view to_string(SearchMode mode) {
  switch (mode) {
    case SearchMode::TextPlain: return "plain";
    case SearchMode::FrameBase: return "base";
    case SearchMode::FrameAverage: return "average";
    case SearchMode::FrameBest: return "best";
    case SearchMode::FrameSummed: return "summed";
    case SearchMode::FrameAll: return "all";
    case SearchMode::Annotation: return "annotation";
    case SearchMode::Combined: return "combined";
  }
  return "annotation";
}

SearchMode search_mode_from_string(std::string_view name) {
  for (auto m : kAllModes) {
    if (to_string(m) == name) return m;
  }
  if (name == "text_plain" || name == "text") return SearchMode::TextPlain;
  if (name.starts_with("frame_")) {
    auto rest = name.substr(6);
    for (auto m : kAllModes) {
      if (is_frame_mode(m) && m != SearchMode::Combined && to_string(m) == rest) return m;
    }
  }
  throw Error(ErrorCode::UnknownMode, "unknown search mode '" + std::string(name) + "'");
}

std::vector<Field> fields_for(SearchMode mode) {
  switch (mode) {
    case SearchMode::TextPlain: return {};
    case SearchMode::FrameBase: return {Field::Base};
    case SearchMode::FrameAverage: return {Field::Average};
    case SearchMode::FrameBest: return {Field::Best};
    case SearchMode::FrameSummed: return {Field::Summed};
    case SearchMode::FrameAll: return {Field::All};
    case SearchMode::Annotation: return {Field::Annotation};
    case SearchMode::Combined: return {Field::Base, Field::Average, Field::Best};
  }
  return {};
}

bool is_frame_mode(SearchMode mode) {
  return mode != SearchMode::TextPlain && mode != SearchMode::Annotation;
}

nlohmann::json result_to_json(const SearchResult& r) {
  return {{"doc_id", r.doc_id},   {"video_id", r.video_id}, {"annotation_id", r.annotation_id},
          {"gloss", r.gloss},     {"start_ms", r.start_ms}, {"end_ms", r.end_ms},
          {"score", r.score},     {"rank", r.rank}};
}

nlohmann::json results_to_json(const std::vector<SearchResult>& rs) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rs) arr.push_back(result_to_json(r));
  return arr;
}

QueryEngine::QueryEngine(const AnnotationStore& store, const VectorIndex& index, Encoder& encoder)
    : store_(store), index_(index), encoder_(encoder) {}

std::vector<SearchResult> QueryEngine::hydrate(std::span<const SearchHit> hits,
                                               std::vector<std::string>* warnings) const {
  auto snap = store_.snapshot();
  std::vector<SearchResult> out;
  out.reserve(hits.size());
  for (const auto& h : hits) {
    std::pair<std::string, std::string> key;
    try {
      key = split_doc_id(h.doc_id);
    } catch (const Error&) {
      key = {h.doc_id, ""};
    }
    auto it = snap->by_key.find(key);
    if (it == snap->by_key.end()) {
      std::string msg = "stale document " + h.doc_id + " dropped from results";
      if (warnings) {
        warnings->push_back(std::move(msg));
      } else {
        log_warning(msg);
      }
      continue;
    }
    const auto& a = snap->effective[it->second].annotation;
    out.push_back({h.doc_id, a.video_id, a.annotation_id, a.gloss, a.start_ms, a.end_ms, h.score,
                   out.size() + 1});
  }
  return out;
}

std::vector<SearchResult> QueryEngine::search_text(const SearchRequest& req) const {
  if (!req.query_text || trim(*req.query_text).empty()) {
    throw Error(ErrorCode::EmptyQuery, "query is empty");
  }
  if (req.k == 0) throw Error(ErrorCode::BadRequest, "k must be positive");

  if (req.mode == SearchMode::TextPlain) {
    std::vector<SearchResult> out;
    for (auto& a : store_.plain_text_lookup(*req.query_text)) {
      out.push_back({make_doc_id(a.video_id, a.annotation_id), a.video_id, a.annotation_id, a.gloss,
                     a.start_ms, a.end_ms, 1.0, out.size() + 1});
    }
    return out;
  }

  auto query = encode_text(encoder_, *req.query_text);
  auto fields = fields_for(req.mode);
  std::vector<SearchHit> hits = fields.size() == 1
                                    ? index_.knn_search(query, fields.front(), req.k)
                                    : index_.multi_field_search(query, fields, req.k);
  return hydrate(hits);
}

std::vector<SearchResult> QueryEngine::search_similar(std::string_view doc_id, Field field,
                                                      std::size_t k) const {
  if (k == 0) throw Error(ErrorCode::BadRequest, "k must be positive");
  auto query = index_.fetch_vectors(doc_id, field);
  auto hits = index_.knn_search(query, field, k + 1);
  std::vector<SearchHit> kept;
  kept.reserve(k);
  for (auto& h : hits) {
    if (h.doc_id == doc_id) continue;
    if (kept.size() == k) break;
    h.rank = kept.size() + 1;
    kept.push_back(std::move(h));
  }
  return hydrate(kept);
}

std::vector<SearchResult> QueryEngine::search(const SearchRequest& req) const {
  if (req.query_doc_id && req.query_text) {
    throw Error(ErrorCode::BadRequest, "give either a query text or a query document, not both");
  }
  if (req.query_doc_id) {
    return search_similar(*req.query_doc_id, req.field_override.value_or(Field::All), req.k);
  }
  return search_text(req);
}

}  // namespace slvideo
