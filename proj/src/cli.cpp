#include "slvideo/cli.hpp"

#include <cstdlib>
#include <csignal>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "slvideo/annotation_store.hpp"
#include "slvideo/config.hpp"
#include "slvideo/errors.hpp"
#include "slvideo/eval_harness.hpp"
#include "slvideo/io.hpp"
#include "slvideo/pipeline.hpp"
#include "slvideo/query_engine.hpp"
#include "slvideo/service.hpp"

namespace slvideo {

namespace {

struct CommonOptions {
  std::string config_path;
  std::string store;
  std::string encoder_kind;
  std::string endpoint;
  std::string model;
  std::size_t dim = 0;
  std::string index;
  std::string frames_dir;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_encoder) {
  cmd->add_option("--config", o.config_path, "Config file (default: $SLVIDEO_CONFIG)");
  cmd->add_option("--store", o.store, "Store directory");
  if (with_encoder) {
    cmd->add_option("--encoder", o.encoder_kind, "Encoder kind")
        ->check(CLI::IsMember({"mock", "remote"}));
    cmd->add_option("--endpoint", o.endpoint, "Remote encoder base URL");
    cmd->add_option("--model", o.model, "Encoder model name");
    cmd->add_option("--dim", o.dim, "Embedding dimension")->check(CLI::PositiveNumber);
  }
}

Config resolve_config(const CommonOptions& o) {
  Config c;
  std::string path = o.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnvVar)) path = env;
  }
  if (!path.empty()) c = Config::load(path);
  if (!o.store.empty()) c.store_dir = o.store;
  if (!o.encoder_kind.empty()) c.encoder.kind = encoder_kind_from_string(o.encoder_kind);
  if (!o.endpoint.empty()) c.encoder.endpoint = o.endpoint;
  if (!o.model.empty()) c.encoder.model_name = o.model;
  if (o.dim != 0) c.encoder.dim = o.dim;
  if (!o.index.empty()) c.index_path = o.index;
  if (!o.frames_dir.empty()) c.frames_dir = o.frames_dir;
  return c;
}

void print_results(std::ostream& out, const std::vector<SearchResult>& results,
                   const std::string& format) {
  if (format == "json") {
    out << results_to_json(results).dump(2) << '\n';
    return;
  }
  for (const auto& r : results) {
    char score[32];
    std::snprintf(score, sizeof score, "%.6f", r.score);
    out << r.rank << '\t' << score << '\t' << r.doc_id << '\t' << r.gloss << '\t' << r.start_ms
        << '-' << r.end_ms << '\n';
  }
}

std::unique_ptr<VectorIndex> load_index_for(const Config& c, const Encoder& enc) {
  auto index = VectorIndex::load(c.index());
  if (index->dim() != enc.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "index dim " + std::to_string(index->dim()) +
                                                  " differs from encoder dim " +
                                                  std::to_string(enc.dim()));
  }
  return index;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sign-language video moment retrieval", "slvideo"};
  app.require_subcommand(1);

  CommonOptions common;

  // ingest
  IngestOptions ingest;
  std::string ingest_fps = "25";
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse EAF files into the store");
  ingest_cmd->add_option("--eaf-dir", ingest.eaf_dir, "Directory of .eaf files")->required();
  ingest_cmd->add_option("--video-dir", ingest.video_dir, "Directory of media files");
  ingest_cmd->add_option("--tier-config", ingest.tier_config, "Tier role config JSON")->required();
  ingest_cmd->add_option("--out", ingest.store_dir, "Store directory to write")->required();
  ingest_cmd->add_option("--fps", ingest_fps, "Frame rate when videos.json gives none");

  // extract-frames
  std::optional<std::string> extract_cmd;
  std::vector<std::string> preprocess;
  unsigned workers = 0;
  auto* extract = app.add_subcommand("extract-frames", "Extract keyframes for every sign");
  add_common(extract, common, false);
  extract->add_option("--frames-dir", common.frames_dir, "Output directory for frames");
  extract->add_option("--extract-cmd", extract_cmd,
                      "Command template with {media} {timestamp_ms} {out}");
  extract->add_option("--preprocess", preprocess,
                      "Image command with {in} {out}; repeat for a pipeline");
  extract->add_option("--workers", workers, "Parallel extraction workers");

  // index
  auto* index_cmd = app.add_subcommand("index", "Embed extracted segments and build the index");
  add_common(index_cmd, common, true);
  index_cmd->add_option("--index", common.index, "Index file to write");

  // search
  std::string mode = "annotation";
  std::string query;
  std::size_t k = 0;
  std::string format = "text";
  auto* search = app.add_subcommand("search", "Text query");
  add_common(search, common, true);
  search->add_option("--index", common.index, "Index file");
  search->add_option("--mode", mode, "plain|base|average|best|summed|all|annotation|combined");
  search->add_option("--query", query, "Query text")->required();
  search->add_option("--k", k, "Number of results")->check(CLI::PositiveNumber);
  search->add_option("--format", format)->check(CLI::IsMember({"json", "text"}));

  // similar
  std::string doc_id;
  std::string field = "all";
  auto* similar = app.add_subcommand("similar", "Signs similar to an indexed segment");
  add_common(similar, common, true);
  similar->add_option("--index", common.index, "Index file");
  similar->add_option("--doc-id", doc_id, "Indexed segment <video_id>_<annotation_id>")->required();
  similar->add_option("--field", field, "Stored embedding to compare");
  similar->add_option("--k", k, "Number of results")->check(CLI::PositiveNumber);
  similar->add_option("--format", format)->check(CLI::IsMember({"json", "text"}));

  // eval
  std::string queries_path;
  std::string csv_path;
  std::string summary_path;
  bool six = false;
  auto* eval = app.add_subcommand("eval", "Precision/recall/F1 report over gloss queries");
  add_common(eval, common, true);
  eval->add_option("--index", common.index, "Index file");
  eval->add_option("--queries", queries_path, "Queries JSON file")->required();
  eval->add_option("--csv", csv_path, "Per-mode CSV output");
  eval->add_option("--summary-csv", summary_path, "Per-query summary CSV output");
  eval->add_flag("--six", six, "Median over six frame options instead of seven");
  eval->add_option("--k", k, "Results per query")->check(CLI::PositiveNumber);

  // export-eaf
  std::string video_id;
  std::string out_path;
  auto* export_cmd = app.add_subcommand("export-eaf", "Write a video's annotations as EAF");
  add_common(export_cmd, common, false);
  export_cmd->add_option("--video-id", video_id, "Video id")->required();
  export_cmd->add_option("--out", out_path, "Output file (default stdout)");

  // serve
  std::string host;
  int port = -1;
  auto* serve = app.add_subcommand("serve", "Run the HTTP backend");
  add_common(serve, common, true);
  serve->add_option("--index", common.index, "Index file");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 = ephemeral)");

  // mock-encoder
  std::size_t mock_dim = 512;
  auto* mock = app.add_subcommand("mock-encoder", "Serve the encoder protocol with the mock encoder");
  mock->add_option("--host", host, "Bind address");
  mock->add_option("--port", port, "Port (0 = ephemeral)");
  mock->add_option("--dim", mock_dim, "Embedding dimension")->check(CLI::PositiveNumber);

  // CLI11 would only say "a subcommand is required"; name the culprit instead.
  if (!args.empty() && !args.front().empty() && args.front().front() != '-' &&
      app.get_subcommands([&](CLI::App* s) { return s->get_name() == args.front(); }).empty()) {
    err << "error: unknown subcommand '" << args.front() << "'\n\n" << app.help();
    return 2;
  }

  std::vector<const char*> argv;
  argv.push_back("slvideo");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*ingest_cmd) {
      ingest.default_fps = parse_fps(ingest_fps);
      auto summary = ingest_corpus(ingest);
      for (const auto& w : summary.warnings) err << "warning: " << w << '\n';
      out << "ingested " << summary.videos << " videos, " << summary.annotations
          << " annotations (" << summary.facial_expression << " facial-expression)\n";
      return 0;
    }

    auto config = resolve_config(common);

    if (*extract) {
      if (extract_cmd) config.extract.extract_template = *extract_cmd;
      if (!preprocess.empty()) config.extract.pipeline.commands = preprocess;
      if (workers > 0) config.extract.workers = workers;
      auto store = AnnotationStore::open(config.store_dir);
      auto segments = extract_corpus(*store, config);
      std::size_t frames = 0;
      for (const auto& s : segments) frames += s.frame_paths.size();
      out << "extracted " << frames << " frames for " << segments.size() << " segments\n";
      return 0;
    }

    if (*mock) {
      EncoderProtocolServer server(std::make_shared<MockEncoder>(mock_dim));
      int bound = server.bind(host.empty() ? "127.0.0.1" : host, port < 0 ? 8100 : port);
      out << "mock encoder listening on port " << bound << std::endl;
      server.listen();
      return 0;
    }

    if (*export_cmd) {
      auto store = AnnotationStore::open(config.store_dir);
      auto eaf = store->export_eaf(video_id);
      if (out_path.empty()) {
        out << eaf;
      } else {
        write_file_atomic(out_path, eaf);
      }
      return 0;
    }

    auto encoder = make_encoder(config.encoder);

    if (*index_cmd) {
      auto store = AnnotationStore::open(config.store_dir);
      std::vector<std::string> warnings;
      auto index = index_corpus(*store, config, *encoder, &warnings);
      for (const auto& w : warnings) err << "warning: " << w << '\n';
      out << "indexed " << index->meta().doc_count << " documents (dim " << index->dim() << ") to "
          << config.index().string() << '\n';
      return 0;
    }

    if (*serve) {
      if (!host.empty()) config.host = host;
      if (port >= 0) config.port = port;
      Service service(config, std::shared_ptr<Encoder>(std::move(encoder)));
      int bound = service.bind(config.host, config.port);
      out << "listening on " << config.host << ":" << bound << std::endl;
      service.listen();
      return 0;
    }

    auto store = AnnotationStore::open(config.store_dir);
    auto index = load_index_for(config, *encoder);
    QueryEngine engine(*store, *index, *encoder);

    if (*search) {
      SearchRequest req;
      req.mode = search_mode_from_string(mode);
      req.query_text = query;
      req.k = k == 0 ? config.k_default : k;
      print_results(out, engine.search_text(req), format);
      return 0;
    }

    if (*similar) {
      print_results(out, engine.search_similar(doc_id, field_from_string(field),
                                               k == 0 ? config.k_default : k),
                    format);
      return 0;
    }

    if (*eval) {
      auto options = config.eval;
      if (six) options.median_over_seven = false;
      if (k != 0) options.k = k;
      nlohmann::json qj;
      try {
        qj = nlohmann::json::parse(read_file(queries_path));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadRequest, queries_path + ": " + e.what());
      }
      auto queries = queries_from_json(qj);
      EvalHarness harness(engine, options);
      auto report = harness.run_report(queries);
      if (!csv_path.empty()) write_file_atomic(csv_path, report.results_csv());
      if (!summary_path.empty()) write_file_atomic(summary_path, report.summary_csv());
      out << report.text_table();
      return 0;
    }
  } catch (const Error& e) {
    err << "error [" << error_code_name(e.code()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error [internal]: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace slvideo
