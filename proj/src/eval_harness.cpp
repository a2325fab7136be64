#include "slvideo/eval_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "slvideo/errors.hpp"
#include "slvideo/text.hpp"

namespace slvideo {

std::vector<EvalQuery> queries_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::BadRequest, "queries file must hold a JSON array");
  std::vector<EvalQuery> out;
  try {
    for (const auto& e : j) {
      EvalQuery q;
      q.query_word = e.at("query_word").get<std::string>();
      if (trim(q.query_word).empty()) throw Error(ErrorCode::EmptyQuery, "empty query_word");
      if (e.contains("modes")) {
        for (const auto& m : e.at("modes")) q.modes.push_back(search_mode_from_string(m.get<std::string>()));
      } else {
        q.modes.assign(kAllModes.begin(), kAllModes.end());
      }
      out.push_back(std::move(q));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("queries file: ") + e.what());
  }
  return out;
}

double f1_score(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

EvalResult score_retrieval(std::string query_word, SearchMode mode,
                           std::span<const std::string> retrieved,
                           const std::set<std::string>& relevant) {
  std::set<std::string> unique(retrieved.begin(), retrieved.end());
  std::size_t hits = 0;
  for (const auto& id : unique) hits += relevant.contains(id) ? 1 : 0;
  EvalResult r;
  r.query_word = std::move(query_word);
  r.mode = mode;
  r.retrieved_count = unique.size();
  r.relevant_count = relevant.size();
  r.hit_count = hits;
  r.precision = unique.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(unique.size());
  r.recall = relevant.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(relevant.size());
  r.f1 = f1_score(r.precision, r.recall);
  return r;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "median of an empty list");
  std::sort(values.begin(), values.end());
  auto n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

EvalHarness::EvalHarness(const QueryEngine& engine, EvalOptions options)
    : engine_(engine), options_(options) {
  if (options_.k == 0) throw Error(ErrorCode::ConfigInvalid, "eval k must be positive");
}

std::vector<SearchMode> EvalHarness::median_modes() const {
  std::vector<SearchMode> out = {SearchMode::FrameBase,   SearchMode::FrameAverage,
                                 SearchMode::FrameBest,   SearchMode::FrameSummed,
                                 SearchMode::FrameAll};
  if (options_.median_over_seven) out.push_back(SearchMode::Annotation);
  out.push_back(SearchMode::Combined);
  return out;
}

std::set<std::string> EvalHarness::relevance_set(std::string_view query_word) const {
  auto needle = normalize_text(trim(query_word));
  auto snap = engine_.store().snapshot();
  std::set<std::string> out;
  for (const auto& e : snap->effective) {
    const auto& a = e.annotation;
    if (a.tier_role != TierRole::FacialExpression || e.normalized_gloss != needle) continue;
    auto id = make_doc_id(a.video_id, a.annotation_id);
    if (engine_.index().contains(id)) out.insert(std::move(id));
  }
  return out;
}

EvalResult EvalHarness::score_query(const EvalQuery& q, SearchMode mode) const {
  SearchRequest req;
  req.mode = mode;
  req.query_text = q.query_word;
  req.k = options_.k;
  auto results = engine_.search_text(req);
  if (results.size() > options_.k) results.resize(options_.k);
  std::vector<std::string> retrieved;
  retrieved.reserve(results.size());
  for (const auto& r : results) retrieved.push_back(r.doc_id);
  return score_retrieval(q.query_word, mode, retrieved, relevance_set(q.query_word));
}

EvalReport EvalHarness::run_report(std::span<const EvalQuery> queries) const {
  if (queries.empty()) throw Error(ErrorCode::EmptyInput, "no evaluation queries");

  struct Task {
    std::size_t query;
    SearchMode mode;
  };
  std::vector<Task> tasks;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    for (auto m : queries[qi].modes) tasks.push_back({qi, m});
  }

  std::vector<EvalResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      auto i = next++;
      if (i >= tasks.size()) return;
      try {
        results[i] = score_query(queries[tasks[i].query], tasks[i].mode);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  {
    unsigned n = std::max(1u, options_.workers);
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  if (error) std::rethrow_exception(error);

  EvalReport report;
  report.results = std::move(results);
  auto med_modes = median_modes();
  std::size_t at = 0;
  for (const auto& q : queries) {
    SummaryRow row{q.query_word, std::nullopt, std::nullopt};
    std::vector<double> frame_f1;
    for (std::size_t j = 0; j < q.modes.size(); ++j, ++at) {
      const auto& r = report.results[at];
      if (std::find(med_modes.begin(), med_modes.end(), r.mode) != med_modes.end()) {
        frame_f1.push_back(r.f1);
      }
      if (r.mode == SearchMode::Annotation) row.annotation_f1 = r.f1;
    }
    if (!frame_f1.empty()) row.frame_median_f1 = median(std::move(frame_f1));
    report.summary.push_back(std::move(row));
  }
  return report;
}

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fixed_or_na(const std::optional<double>& v) { return v ? fixed(*v) : "NA"; }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::size_t display_width(std::string_view utf8) {
  std::size_t n = 0;
  for (unsigned char c : utf8) n += (c & 0xC0) != 0x80 ? 1 : 0;
  return n;
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], display_width(row[c]));
  }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c > 0) out += "  ";
      out += rows[r][c];
      if (c + 1 < rows[r].size()) out.append(widths[c] - display_width(rows[r][c]), ' ');
    }
    out += '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w;
      out.append(total + 2 * (widths.size() - 1), '-');
      out += '\n';
    }
  }
  return out;
}

}  // namespace

std::string EvalReport::results_csv() const {
  std::string out = "query_word,mode,precision,recall,f1\n";
  for (const auto& r : results) {
    out += csv_field(r.query_word) + "," + std::string(to_string(r.mode)) + "," + fixed(r.precision) +
           "," + fixed(r.recall) + "," + fixed(r.f1) + "\n";
  }
  return out;
}

std::string EvalReport::summary_csv() const {
  std::string out = "query_word,frame_median_f1,annotation_f1\n";
  for (const auto& s : summary) {
    out += csv_field(s.query_word) + "," + fixed_or_na(s.frame_median_f1) + "," +
           fixed_or_na(s.annotation_f1) + "\n";
  }
  return out;
}

std::string EvalReport::text_table() const {
  std::vector<std::vector<std::string>> head = {{"query_word", "frame_median_f1", "annotation_f1"}};
  for (const auto& s : summary) {
    head.push_back({s.query_word, fixed_or_na(s.frame_median_f1), fixed_or_na(s.annotation_f1)});
  }
  std::vector<std::vector<std::string>> detail = {
      {"query_word", "mode", "precision", "recall", "f1", "retrieved", "relevant"}};
  for (const auto& r : results) {
    detail.push_back({r.query_word, std::string(to_string(r.mode)), fixed(r.precision),
                      fixed(r.recall), fixed(r.f1), std::to_string(r.retrieved_count),
                      std::to_string(r.relevant_count)});
  }
  return render_table(head) + "\n" + render_table(detail);
}

}  // namespace slvideo
