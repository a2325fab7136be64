#include <gtest/gtest.h>

#include "slvideo/annotation.hpp"
#include "slvideo/errors.hpp"

using namespace slvideo;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no slvideo::Error thrown";
  return ErrorCode::Internal;
}

}  // namespace

TEST(TierRoleConfig, FirstMatchWins) {
  TierRoleConfig c({{"GLOSA_EXP_FACIAL*", TierRole::FacialExpression},
                    {"GLOSA*", TierRole::ManualGloss},
                    {"TRADU*", TierRole::Translation}});
  EXPECT_EQ(c.resolve("GLOSA_EXP_FACIAL"), TierRole::FacialExpression);
  EXPECT_EQ(c.resolve("GLOSA_EXP_FACIAL_D"), TierRole::FacialExpression);
  EXPECT_EQ(c.resolve("GLOSA_MD"), TierRole::ManualGloss);
  EXPECT_EQ(c.resolve("TRADUCAO"), TierRole::Translation);
  EXPECT_EQ(c.resolve("COMENTARIO"), TierRole::Other);
}

TEST(TierRoleConfig, RequiresExactlyOneFacialPattern) {
  EXPECT_EQ(code_of([] { TierRoleConfig({{"GLOSA*", TierRole::ManualGloss}}); }),
            ErrorCode::ConfigInvalid);
  EXPECT_EQ(code_of([] {
              TierRoleConfig({{"A*", TierRole::FacialExpression}, {"B*", TierRole::FacialExpression}});
            }),
            ErrorCode::ConfigInvalid);
}

TEST(TierRoleConfig, JsonRoundTrip) {
  TierRoleConfig c({{"F*", TierRole::FacialExpression}, {"T*", TierRole::Translation}});
  auto back = TierRoleConfig::from_json(c.to_json());
  ASSERT_EQ(back.patterns().size(), 2u);
  EXPECT_EQ(back.patterns()[1].glob, "T*");
  EXPECT_EQ(back.patterns()[1].role, TierRole::Translation);
  EXPECT_EQ(code_of([] { TierRoleConfig::from_json({{"tier_patterns", 3}}); }),
            ErrorCode::ConfigInvalid);
}

TEST(DocId, ComposeAndSplit) {
  EXPECT_EQ(make_doc_id("video-1", "a7"), "video-1_a7");
  auto [v, a] = split_doc_id("video-1_a7");
  EXPECT_EQ(v, "video-1");
  EXPECT_EQ(a, "a7");
  EXPECT_EQ(code_of([] { make_doc_id("video_1", "a7"); }), ErrorCode::InvalidIdentifier);
  EXPECT_EQ(code_of([] { make_doc_id("v", ""); }), ErrorCode::InvalidIdentifier);
  EXPECT_EQ(code_of([] { split_doc_id("nounderscore"); }), ErrorCode::UnknownDocument);
}

TEST(Fps, ParseAndFormat) {
  EXPECT_EQ(parse_fps("25"), (Fps{25, 1}));
  EXPECT_EQ(parse_fps("30000/1001"), (Fps{30000, 1001}));
  EXPECT_EQ(format_fps(Fps{25, 1}), "25");
  EXPECT_EQ(format_fps(Fps{30000, 1001}), "30000/1001");
  EXPECT_NEAR(parse_fps("29.97").value(), 29.97, 1e-12);
  EXPECT_THROW(parse_fps("0"), Error);
  EXPECT_THROW(parse_fps("abc"), Error);
}

TEST(AnnotationJson, RoundTrip) {
  Annotation a{"a1", "v1", "GLOSA_EXP_FACIAL", TierRole::FacialExpression, "Dúvida", 10, 20, 3,
               Origin::UserEdited};
  EXPECT_EQ(annotation_from_json(annotation_to_json(a), "v1"), a);
}

TEST(CheckInterval, RejectsEmptyAndNegative) {
  EXPECT_NO_THROW(check_interval(0, 1));
  EXPECT_EQ(code_of([] { check_interval(5, 5); }), ErrorCode::InvalidInterval);
  EXPECT_EQ(code_of([] { check_interval(-1, 5); }), ErrorCode::InvalidInterval);
}

TEST(Errors, NamesAndStatuses) {
  EXPECT_EQ(error_code_name(ErrorCode::EmptyQuery), "empty_query");
  EXPECT_EQ(error_code_name(ErrorCode::UnknownDocument), "unknown_document");
  EXPECT_EQ(error_http_status(ErrorCode::EmptyQuery), 400);
  EXPECT_EQ(error_http_status(ErrorCode::UnknownDocument), 404);
  EXPECT_EQ(error_http_status(ErrorCode::ConcurrentEditConflict), 409);
  EXPECT_EQ(error_http_status(ErrorCode::EncoderUnavailable), 503);
}
