#include <gtest/gtest.h>

#include "slvideo/errors.hpp"
#include "slvideo/io.hpp"
#include "slvideo/segmenter.hpp"
#include "test_support.hpp"

using namespace slvideo;
using slvideo::testkit::TempDir;

namespace {

Annotation fe(std::int64_t start, std::int64_t end) {
  Annotation a;
  a.annotation_id = "a1";
  a.video_id = "v1";
  a.tier_id = "GLOSA_EXP_FACIAL";
  a.tier_role = TierRole::FacialExpression;
  a.gloss = "Lobo";
  a.start_ms = start;
  a.end_ms = end;
  return a;
}

using Ticks = std::vector<std::int64_t>;

}  // namespace

TEST(PlanKeyframes, Examples) {
  EXPECT_EQ(plan_keyframes(fe(1000, 1100), {25, 1}).frame_timestamps_ms, (Ticks{1000, 1040, 1080}));
  EXPECT_EQ(plan_keyframes(fe(1005, 1010), {25, 1}).frame_timestamps_ms, (Ticks{1005}));
  EXPECT_EQ(plan_keyframes(fe(0, 40), {25, 1}).frame_timestamps_ms, (Ticks{0, 40}));
}

TEST(PlanKeyframes, CarriesIdentity) {
  auto s = plan_keyframes(fe(1000, 1100), {25, 1});
  EXPECT_EQ(s.doc_id(), "v1_a1");
  EXPECT_EQ(s.start_ms, 1000);
  EXPECT_EQ(s.end_ms, 1100);
  EXPECT_TRUE(s.frame_paths.empty());
}

TEST(PlanKeyframes, RejectsOtherTiers) {
  auto a = fe(0, 100);
  a.tier_role = TierRole::Translation;
  try {
    plan_keyframes(a, {25, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotFacialExpressionTier);
  }
}

TEST(KeyframeTimestamps, NtscRoundsToNearestMillisecond) {
  // 30000/1001 fps: frame k at k * 33.3667 ms
  EXPECT_EQ(keyframe_timestamps(0, 100, {30000, 1001}), (Ticks{0, 33, 67, 100}));
}

TEST(KeyframeTimestamps, MatchesBruteForce) {
  for (Fps fps : {Fps{25, 1}, Fps{24, 1}, Fps{30000, 1001}, Fps{50, 1}}) {
    for (std::int64_t start : {0, 7, 999, 12345}) {
      for (std::int64_t len : {1, 39, 40, 41, 500}) {
        Ticks expected;
        for (std::int64_t k = 0;; ++k) {
          // round half up of k * 1000 * den / num
          double t = std::floor(static_cast<double>(k) * 1000.0 * fps.den / fps.num + 0.5);
          if (t > start + len) break;
          if (t >= start) expected.push_back(static_cast<std::int64_t>(t));
        }
        if (expected.empty()) expected.push_back(start);
        EXPECT_EQ(keyframe_timestamps(start, start + len, fps), expected)
            << fps.num << "/" << fps.den << " " << start << "+" << len;
      }
    }
  }
}

TEST(ExpandCommand, QuotesValues) {
  auto cmd = expand_command("tool {in} {out}", {{"in", "a b.png"}, {"out", "it's.png"}});
  EXPECT_EQ(cmd, "tool 'a b.png' 'it'\\''s.png'");
}

TEST(ExtractFrames, SyntheticToolAndPipeline) {
  TempDir dir;
  write_file_atomic(dir / "v1.bin", "media");
  VideoRecord video{"v1", dir / "v1.bin", {25, 1}, 5000};
  auto seg = plan_keyframes(fe(1000, 1100), video.fps);

  ExtractOptions opts;
  opts.extract_template = slvideo::testkit::synth_extract_template();
  opts.pipeline.commands = {"cp {in} {out}", "cp {in} {out}"};
  auto out = extract_frames(seg, video, dir / "frames", opts);
  ASSERT_EQ(out.frame_paths.size(), 3u);
  EXPECT_EQ(out.frame_paths[0].filename(), "v1_a1_1000.png");
  for (const auto& p : out.frame_paths) {
    auto bytes = read_file(p);
    ASSERT_GT(bytes.size(), 8u);
    EXPECT_EQ(bytes.substr(1, 3), "PNG");
  }
  // distinct timestamps give distinct frames; reruns are byte-identical
  EXPECT_NE(read_file(out.frame_paths[0]), read_file(out.frame_paths[1]));
  auto again = extract_frames(seg, video, dir / "frames2", opts);
  EXPECT_EQ(read_file(out.frame_paths[2]), read_file(again.frame_paths[2]));
}

TEST(ExtractFrames, Failures) {
  TempDir dir;
  auto seg = plan_keyframes(fe(1000, 1100), {25, 1});
  ExtractOptions opts;
  opts.extract_template = slvideo::testkit::synth_extract_template();

  auto code = [&](const VideoRecord& v, const ExtractOptions& o) {
    try {
      extract_frames(seg, v, dir / "frames", o);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };

  EXPECT_EQ(code({"v1", dir / "missing.bin", {25, 1}, 5000}, opts), ErrorCode::MediaMissing);

  write_file_atomic(dir / "v1.bin", "media");
  VideoRecord video{"v1", dir / "v1.bin", {25, 1}, 5000};
  auto bad_extract = opts;
  bad_extract.extract_template = "false {media} {timestamp_ms} {out}";
  EXPECT_EQ(code(video, bad_extract), ErrorCode::ExtractionFailed);

  auto bad_pipeline = opts;
  bad_pipeline.pipeline.commands = {"sh -c 'echo broken >&2; exit 3' {in} {out}"};
  try {
    extract_frames(seg, video, dir / "frames", bad_pipeline);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PipelineFailed);
    EXPECT_NE(std::string(e.what()).find("broken"), std::string::npos);
  }
}

TEST(ExtractAll, PreservesOrderWithWorkers) {
  TempDir dir;
  write_file_atomic(dir / "v1.bin", "media");
  VideoRecord video{"v1", dir / "v1.bin", {25, 1}, 50000};
  std::vector<Segment> segs;
  for (int i = 0; i < 8; ++i) {
    auto a = fe(1000 * i, 1000 * i + 90);
    a.annotation_id = "a" + std::to_string(i);
    segs.push_back(plan_keyframes(a, video.fps));
  }
  ExtractOptions opts;
  opts.extract_template = slvideo::testkit::synth_extract_template();
  opts.workers = 3;
  auto out = extract_all(segs, {video}, dir / "frames", opts);
  ASSERT_EQ(out.size(), segs.size());
  for (std::size_t i = 0; i < segs.size(); ++i) {
    EXPECT_EQ(out[i].annotation_id, segs[i].annotation_id);
    EXPECT_EQ(out[i].frame_paths.size(), segs[i].frame_timestamps_ms.size());
  }
}

TEST(SegmentJson, RoundTrip) {
  auto s = plan_keyframes(fe(1000, 1100), {25, 1});
  s.frame_paths = {"/f/a.png", "/f/b.png", "/f/c.png"};
  EXPECT_EQ(segment_from_json(segment_to_json(s)), s);
}
