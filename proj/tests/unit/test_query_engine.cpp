#include <gtest/gtest.h>

#include "slvideo/errors.hpp"
#include "slvideo/query_engine.hpp"
#include "slvideo/text.hpp"
#include "test_support.hpp"

using namespace slvideo;

namespace {

Embedding vec(std::vector<double> v) { return Embedding(std::move(v)); }

Annotation fe(std::string id, std::string gloss, std::int64_t start) {
  Annotation a;
  a.annotation_id = std::move(id);
  a.video_id = "v1";
  a.tier_id = "GLOSA_EXP_FACIAL";
  a.tier_role = TierRole::FacialExpression;
  a.gloss = std::move(gloss);
  a.start_ms = start;
  a.end_ms = start + 400;
  return a;
}

SignEmbeddings uniform_doc(const std::string& id, const Embedding& v) {
  SignEmbeddings d;
  d.doc_id = id;
  for (auto f : kAllFields) d.field(f) = v;
  return d;
}

}  // namespace

TEST(SearchMode, Names) {
  for (auto m : kAllModes) EXPECT_EQ(search_mode_from_string(to_string(m)), m);
  EXPECT_EQ(search_mode_from_string("text_plain"), SearchMode::TextPlain);
  EXPECT_EQ(search_mode_from_string("frame_all"), SearchMode::FrameAll);
  try {
    search_mode_from_string("fuzzy");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownMode);
  }
}

TEST(SearchMode, DeclaredFieldSets) {
  using F = std::vector<Field>;
  EXPECT_EQ(fields_for(SearchMode::TextPlain), F{});
  EXPECT_EQ(fields_for(SearchMode::FrameBase), F{Field::Base});
  EXPECT_EQ(fields_for(SearchMode::FrameAverage), F{Field::Average});
  EXPECT_EQ(fields_for(SearchMode::FrameBest), F{Field::Best});
  EXPECT_EQ(fields_for(SearchMode::FrameSummed), F{Field::Summed});
  EXPECT_EQ(fields_for(SearchMode::FrameAll), F{Field::All});
  EXPECT_EQ(fields_for(SearchMode::Annotation), F{Field::Annotation});
  EXPECT_EQ(fields_for(SearchMode::Combined), (F{Field::Base, Field::Average, Field::Best}));
  EXPECT_FALSE(is_frame_mode(SearchMode::Annotation));
  EXPECT_FALSE(is_frame_mode(SearchMode::TextPlain));
  EXPECT_TRUE(is_frame_mode(SearchMode::Combined));
}

TEST(SearchMode, EachModeQueriesOnlyItsFields) {
  // Each doc is a perfect match on exactly one field; every mode's top hit
  // must be the doc whose matching field is in its declared set.
  MockEncoder enc(6);
  auto q = normalize_unit(encode_text(enc, "probe"));
  std::mt19937_64 rng(1);
  VectorIndex index(6);
  AnnotationStore store;
  std::vector<Annotation> anns;
  for (auto f : kAllFields) {
    std::string aid = std::string("x") + std::string(to_string(f));
    anns.push_back(fe(aid, "g", 1000 * static_cast<int>(f)));
    auto d = testkit::random_document(rng, "v1_" + aid, 6);
    d.field(f) = q;
    // make every other field clearly worse than a perfect match
    for (auto g : kAllFields) {
      if (g != f) d.field(g) = normalize_unit(-1.0 * q + 0.1 * d.field(g));
    }
    index.index_document(d);
  }
  store.add_video({"v1", "", {25, 1}, 10000}, anns);
  QueryEngine engine(store, index, enc);
  for (auto m : kAllModes) {
    if (m == SearchMode::TextPlain) continue;
    SearchRequest req;
    req.mode = m;
    req.query_text = "probe";
    req.k = 6;
    auto res = engine.search_text(req);
    ASSERT_FALSE(res.empty());
    auto top_field = field_from_string(res[0].annotation_id.substr(1));
    auto fs = fields_for(m);
    EXPECT_NE(std::find(fs.begin(), fs.end(), top_field), fs.end()) << to_string(m);
  }
}

TEST(QueryEngine, PlainTextReturnsAllMatches) {
  AnnotationStore store;
  std::vector<Annotation> anns;
  for (int i = 0; i < 15; ++i) anns.push_back(fe("a" + std::to_string(i), i % 2 ? "Lobo" : "Lebre", i * 1000));
  store.add_video({"v1", "", {25, 1}, 20000}, anns);
  VectorIndex index(4);
  MockEncoder enc(4);
  QueryEngine engine(store, index, enc);
  SearchRequest req;
  req.mode = SearchMode::TextPlain;
  req.query_text = "LOBO";
  req.k = 3;
  auto res = engine.search_text(req);
  EXPECT_EQ(res.size(), 7u);
  for (std::size_t i = 0; i < res.size(); ++i) {
    EXPECT_EQ(res[i].score, 1.0);
    EXPECT_EQ(res[i].rank, i + 1);
  }
}

TEST(QueryEngine, SimilarExcludesSourceAndRanksTwin) {
  AnnotationStore store;
  store.add_video({"v1", "", {25, 1}, 9000}, {fe("a1", "Lobo", 0), fe("a2", "Lobo", 1000), fe("a3", "Lebre", 2000)});
  VectorIndex index(3);
  index.index_document(uniform_doc("v1_a1", vec({0, 1, 0})));
  index.index_document(uniform_doc("v1_a2", vec({0, 1, 0})));
  index.index_document(uniform_doc("v1_a3", vec({1, 0, 0})));
  MockEncoder enc(3);
  QueryEngine engine(store, index, enc);
  for (const char* src : {"v1_a1", "v1_a2"}) {
    auto res = engine.search_similar(src, Field::All, 10);
    ASSERT_EQ(res.size(), 2u);
    EXPECT_NE(res[0].doc_id, src);
    EXPECT_NEAR(res[0].score, 1.0, 1e-9);
    EXPECT_EQ(res[0].rank, 1u);
    for (const auto& r : res) EXPECT_NE(r.doc_id, src);
  }
  try {
    engine.search_similar("v1_zz");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownDocument);
  }
}

TEST(QueryEngine, StaleHitsAreDropped) {
  AnnotationStore store;
  store.add_video({"v1", "", {25, 1}, 9000}, {fe("a1", "Lobo", 0), fe("a2", "Lobo", 1000)});
  VectorIndex index(2);
  index.index_document(uniform_doc("v1_a1", vec({1, 0})));
  index.index_document(uniform_doc("v1_a2", vec({0, 1})));
  store.remove("v1", "a1", 0);
  MockEncoder enc(2);
  QueryEngine engine(store, index, enc);
  std::vector<std::string> warnings;
  auto hits = index.knn_search(vec({1, 0}), Field::All, 10);
  auto res = engine.hydrate(hits, &warnings);
  ASSERT_EQ(res.size(), 1u);
  EXPECT_EQ(res[0].doc_id, "v1_a2");
  EXPECT_EQ(res[0].rank, 1u);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(QueryEngine, Errors) {
  AnnotationStore store;
  VectorIndex index(4);
  MockEncoder enc(4);
  QueryEngine engine(store, index, enc);
  SearchRequest req;
  req.query_text = " ";
  for (auto m : kAllModes) {
    req.mode = m;
    try {
      engine.search_text(req);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::EmptyQuery);
    }
  }
}

TEST(QueryEngine, SyntheticCorpusAnnotationSearch) {
  const auto& config = testkit::shared_synthetic_store();
  auto store = AnnotationStore::open(config.store_dir);
  auto index = VectorIndex::load(config.index());
  MockEncoder enc(config.encoder.dim);
  QueryEngine engine(*store, *index, enc);
  SearchRequest req;
  req.mode = SearchMode::Annotation;
  req.query_text = "Lobo";
  auto res = engine.search_text(req);
  ASSERT_EQ(res.size(), 10u);
  for (const auto& r : res) {
    EXPECT_EQ(r.gloss, "Lobo");
    EXPECT_NEAR(r.score, 1.0, 1e-9);
  }
  auto json = results_to_json(res);
  ASSERT_TRUE(json.is_array());
  EXPECT_EQ(json[0]["rank"], 1);
}
