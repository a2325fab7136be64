#include <gtest/gtest.h>

#include <algorithm>
#include <regex>

#include "slvideo/eaf.hpp"
#include "slvideo/errors.hpp"
#include "slvideo/io.hpp"
#include "test_support.hpp"

using namespace slvideo;
using slvideo::testkit::fixtures_dir;

namespace {

TierRoleConfig tiers() { return TierRoleConfig::load(fixtures_dir() / "tier_config.json"); }

std::string fixture(const char* name) { return read_file(fixtures_dir() / name); }

ErrorCode parse_error(const char* name) {
  try {
    parse_eaf(fixture(name), "v1", tiers());
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << name << " parsed without error";
  return ErrorCode::Internal;
}

}  // namespace

TEST(ParseEaf, SingleAnnotation) {
  auto anns = parse_eaf(fixture("lobo_single.eaf"), "lobo", tiers());
  ASSERT_EQ(anns.size(), 1u);
  const auto& a = anns[0];
  EXPECT_EQ(a.annotation_id, "a7");
  EXPECT_EQ(a.video_id, "lobo");
  EXPECT_EQ(a.tier_id, "GLOSA_EXP_FACIAL");
  EXPECT_EQ(a.tier_role, TierRole::FacialExpression);
  EXPECT_EQ(a.gloss, "Lobo");
  EXPECT_EQ(a.start_ms, 1000);
  EXPECT_EQ(a.end_ms, 2500);
  EXPECT_EQ(a.revision, 0u);
  EXPECT_EQ(a.origin, Origin::Parsed);
}

TEST(ParseEaf, MultiTierWithDiacriticsAndRefAnnotations) {
  std::vector<std::string> warnings;
  auto anns = parse_eaf(fixture("multi_tier.eaf"), "conversa", tiers(), &warnings);
  ASSERT_EQ(anns.size(), 5u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("a30"), std::string::npos);

  // Sorted by (tier, start, id).
  EXPECT_EQ(anns[0].tier_id, "GLOSA_EXP_FACIAL");
  EXPECT_EQ(anns[0].gloss, "Dúvida");
  EXPECT_EQ(anns[0].start_ms, 1000);
  EXPECT_EQ(anns[0].end_ms, 1500);
  EXPECT_EQ(anns[1].gloss, "Não");
  EXPECT_EQ(anns[2].gloss, "Então");
  EXPECT_EQ(anns[2].start_ms, 2600);
  EXPECT_EQ(anns[3].tier_role, TierRole::ManualGloss);
  EXPECT_EQ(anns[4].tier_role, TierRole::Translation);
  EXPECT_EQ(anns[4].gloss, "Não sei, é uma dúvida grande & séria");
}

TEST(ParseEaf, ByteOrderMarkAndSharedSlots) {
  auto anns = parse_eaf(fixture("shared_slots.eaf"), "v", tiers());
  ASSERT_EQ(anns.size(), 3u);
  EXPECT_EQ(anns[0].start_ms, 0);
  EXPECT_EQ(anns[0].end_ms, 40);
  EXPECT_EQ(anns[1].start_ms, 40);
  EXPECT_EQ(anns[2].tier_role, TierRole::Translation);
}

TEST(ParseEaf, ErrorCases) {
  EXPECT_EQ(parse_error("dangling.eaf"), ErrorCode::DanglingReference);
  EXPECT_EQ(parse_error("unresolved.eaf"), ErrorCode::UnresolvedTimeSlot);
  EXPECT_EQ(parse_error("malformed.eaf"), ErrorCode::MalformedEaf);
}

TEST(ParseEaf, InlineErrorCases) {
  auto cfg = tiers();
  auto code = [&](const std::string& xml) {
    try {
      parse_eaf(xml, "v", cfg);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  EXPECT_EQ(code("<NOT_EAF/>"), ErrorCode::MalformedEaf);
  const std::string slots =
      "<TIME_ORDER><TIME_SLOT TIME_SLOT_ID=\"t1\" TIME_VALUE=\"500\"/>"
      "<TIME_SLOT TIME_SLOT_ID=\"t2\" TIME_VALUE=\"100\"/></TIME_ORDER>";
  // start >= end
  EXPECT_EQ(code("<ANNOTATION_DOCUMENT>" + slots +
                 "<TIER TIER_ID=\"X\"><ANNOTATION><ALIGNABLE_ANNOTATION ANNOTATION_ID=\"a\" "
                 "TIME_SLOT_REF1=\"t1\" TIME_SLOT_REF2=\"t2\"><ANNOTATION_VALUE>x</ANNOTATION_VALUE>"
                 "</ALIGNABLE_ANNOTATION></ANNOTATION></TIER></ANNOTATION_DOCUMENT>"),
            ErrorCode::MalformedEaf);
  // duplicate annotation id across tiers
  EXPECT_EQ(code("<ANNOTATION_DOCUMENT>" + slots +
                 "<TIER TIER_ID=\"X\"><ANNOTATION><ALIGNABLE_ANNOTATION ANNOTATION_ID=\"a\" "
                 "TIME_SLOT_REF1=\"t2\" TIME_SLOT_REF2=\"t1\"><ANNOTATION_VALUE>x</ANNOTATION_VALUE>"
                 "</ALIGNABLE_ANNOTATION></ANNOTATION></TIER>"
                 "<TIER TIER_ID=\"Y\"><ANNOTATION><ALIGNABLE_ANNOTATION ANNOTATION_ID=\"a\" "
                 "TIME_SLOT_REF1=\"t2\" TIME_SLOT_REF2=\"t1\"><ANNOTATION_VALUE>y</ANNOTATION_VALUE>"
                 "</ALIGNABLE_ANNOTATION></ANNOTATION></TIER></ANNOTATION_DOCUMENT>"),
            ErrorCode::MalformedEaf);
}

TEST(ParseEaf, ElementOrderDoesNotMatter) {
  // Same content as multi_tier.eaf with the tiers and time slots reversed.
  auto original = fixture("multi_tier.eaf");
  auto a = parse_eaf(original, "v", tiers());

  std::regex tier_re("<TIER [\\s\\S]*?</TIER>");
  std::vector<std::string> blocks;
  for (std::sregex_iterator it(original.begin(), original.end(), tier_re), end; it != end; ++it) {
    blocks.push_back(it->str());
  }
  ASSERT_EQ(blocks.size(), 4u);
  std::string stripped = std::regex_replace(original, tier_re, "");
  std::string reversed;
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) reversed += *it;
  auto pos = stripped.find("</ANNOTATION_DOCUMENT>");
  stripped.insert(pos, reversed);

  auto b = parse_eaf(stripped, "v", tiers());
  EXPECT_EQ(a, b);
}

TEST(WriteEaf, RoundTripFixpoint) {
  for (const char* name : {"lobo_single.eaf", "multi_tier.eaf", "shared_slots.eaf"}) {
    SCOPED_TRACE(name);
    VideoRecord video{"v", "/media/v.mp4", {25, 1}, 10000};
    auto first = parse_eaf(fixture(name), "v", tiers());
    auto exported = write_eaf(first, video);
    auto second = parse_eaf(exported, "v", tiers());
    EXPECT_EQ(first, second);
    EXPECT_EQ(write_eaf(second, video), exported);
  }
}

TEST(WriteEaf, EscapesMarkup) {
  VideoRecord video{"v", "", {25, 1}, 100};
  Annotation a{"a1", "v", "T", TierRole::Other, "<b> & \"q\"", 0, 10, 0, Origin::Parsed};
  auto out = write_eaf({a}, video);
  auto back = parse_eaf(out, "v", tiers());
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].gloss, a.gloss);
}
