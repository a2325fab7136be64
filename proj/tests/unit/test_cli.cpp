#include <gtest/gtest.h>

#include <sstream>

#include <json.hpp>

#include "slvideo/cli.hpp"
#include "slvideo/io.hpp"
#include "test_support.hpp"

using namespace slvideo;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> with_store(std::vector<std::string> args) {
  const auto& c = testkit::shared_synthetic_store();
  args.insert(args.end(), {"--store", c.store_dir.string(), "--dim", std::to_string(c.encoder.dim)});
  return args;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"search"}).code, 2);  // --query missing
  EXPECT_EQ(run({"search", "--query", "x", "--format", "yaml"}).code, 2);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, 0); }

TEST(Cli, SearchJson) {
  auto r = run(with_store({"search", "--mode", "annotation", "--query", "Lobo", "--k", "10",
                           "--format", "json"}));
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  ASSERT_TRUE(j.is_array());
  EXPECT_EQ(j.size(), 10u);
  EXPECT_EQ(j[0]["gloss"], "Lobo");
}

TEST(Cli, DomainErrorsExitOne) {
  auto r = run(with_store({"search", "--mode", "annotation", "--query", "  "}));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("empty_query"), std::string::npos);
  auto s = run(with_store({"similar", "--doc-id", "nope_a1"}));
  EXPECT_EQ(s.code, 1);
  EXPECT_NE(s.err.find("unknown_document"), std::string::npos);
}

TEST(Cli, EvalWritesCsv) {
  testkit::TempDir dir;
  write_file_atomic(dir / "queries.json", R"([{"query_word": "Lobo"}])");
  auto r = run(with_store({"eval", "--queries", (dir / "queries.json").string(), "--csv",
                           (dir / "out.csv").string(), "--summary-csv", (dir / "sum.csv").string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("frame_median_f1"), std::string::npos);
  auto csv = read_file(dir / "out.csv");
  EXPECT_EQ(csv.rfind("query_word,mode,precision,recall,f1\n", 0), 0u);
}

TEST(Cli, ExportEaf) {
  auto r = run(with_store({"export-eaf", "--video-id", "video2"}));
  // export-eaf has no --dim; that is a usage error
  EXPECT_EQ(r.code, 2);
  const auto& c = testkit::shared_synthetic_store();
  auto ok = run({"export-eaf", "--store", c.store_dir.string(), "--video-id", "video2"});
  ASSERT_EQ(ok.code, 0) << ok.err;
  EXPECT_NE(ok.out.find("GLOSA_EXP_FACIAL"), std::string::npos);
}

TEST(Cli, FullPipelineFromConfigFile) {
  testkit::TempDir dir;
  testkit::write_synthetic_corpus(dir.path());
  auto ingest = run({"ingest", "--eaf-dir", (dir / "eaf").string(), "--video-dir",
                     (dir / "videos").string(), "--tier-config", (dir / "tier_config.json").string(),
                     "--out", (dir / "store").string()});
  ASSERT_EQ(ingest.code, 0) << ingest.err;
  EXPECT_NE(ingest.out.find("60 facial-expression"), std::string::npos);

  nlohmann::json cfg = {{"store_dir", "store"},
                        {"encoder", {{"kind", "mock"}, {"dim", 32}}},
                        {"extract", {{"template", testkit::synth_extract_template()}}}};
  write_file_atomic(dir / "slvideo.json", cfg.dump());
  auto conf = (dir / "slvideo.json").string();

  auto extract = run({"extract-frames", "--config", conf});
  ASSERT_EQ(extract.code, 0) << extract.err;
  auto index = run({"index", "--config", conf});
  ASSERT_EQ(index.code, 0) << index.err;
  EXPECT_NE(index.out.find("indexed 60 documents"), std::string::npos);
  auto search = run({"search", "--config", conf, "--query", "duvida", "--mode", "plain"});
  ASSERT_EQ(search.code, 0) << search.err;
  EXPECT_EQ(std::count(search.out.begin(), search.out.end(), '\n'), 8);
}
