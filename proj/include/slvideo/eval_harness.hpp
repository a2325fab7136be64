#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slvideo/query_engine.hpp"

namespace slvideo {

struct EvalQuery {
  std::string query_word;
  std::vector<SearchMode> modes;
};

// Queries file: [{"query_word": "...", "modes": ["annotation", ...]}].
// A missing "modes" key means all eight modes.
std::vector<EvalQuery> queries_from_json(const nlohmann::json& j);

struct EvalResult {
  std::string query_word;
  SearchMode mode = SearchMode::Annotation;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t retrieved_count = 0;
  std::size_t relevant_count = 0;
  std::size_t hit_count = 0;
};

// 2PR / (P + R), or 0 when P + R = 0.
double f1_score(double precision, double recall);

// Precision/recall/F1 of a retrieved list against a relevant set. Duplicate
// ids in `retrieved` count once.
EvalResult score_retrieval(std::string query_word, SearchMode mode,
                           std::span<const std::string> retrieved,
                           const std::set<std::string>& relevant);

// Order statistic; mean of the two middle values for even sizes.
// Throws EmptyInput on an empty list.
double median(std::vector<double> values);

struct EvalOptions {
  std::size_t k = kDefaultTopK;
  // Seven: the six stored fields plus Combined. Six: base, average, best,
  // summed, all and Combined (the annotation field has its own column).
  bool median_over_seven = true;
  unsigned workers = 1;
};

struct SummaryRow {
  std::string query_word;
  std::optional<double> frame_median_f1;
  std::optional<double> annotation_f1;
};

struct EvalReport {
  std::vector<EvalResult> results;  // query order, then mode order as requested
  std::vector<SummaryRow> summary;  // one per query

  // query_word,mode,precision,recall,f1
  std::string results_csv() const;
  // query_word,frame_median_f1,annotation_f1
  std::string summary_csv() const;
  // Table-shaped text: one row per query with the median and annotation
  // columns, followed by the per-mode breakdown.
  std::string text_table() const;
};

class EvalHarness {
 public:
  EvalHarness(const QueryEngine& engine, EvalOptions options = {});

  // Indexed documents whose facial-expression gloss normalizes to the same
  // text as query_word.
  std::set<std::string> relevance_set(std::string_view query_word) const;

  EvalResult score_query(const EvalQuery& q, SearchMode mode) const;

  // Throws EmptyInput when queries is empty.
  EvalReport run_report(std::span<const EvalQuery> queries) const;

  // Modes whose F1 values feed the frame median.
  std::vector<SearchMode> median_modes() const;

 private:
  const QueryEngine& engine_;
  EvalOptions options_;
};

}  // namespace slvideo
