#include "slvideo/segmenter.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "slvideo/errors.hpp"

namespace slvideo {

nlohmann::json segment_to_json(const Segment& s) {
  auto paths = nlohmann::json::array();
  for (const auto& p : s.frame_paths) paths.push_back(p.generic_string());
  return {{"video_id", s.video_id},
          {"annotation_id", s.annotation_id},
          {"start_ms", s.start_ms},
          {"end_ms", s.end_ms},
          {"frame_timestamps_ms", s.frame_timestamps_ms},
          {"frame_paths", std::move(paths)}};
}

Segment segment_from_json(const nlohmann::json& j) {
  try {
    Segment s;
    s.video_id = j.at("video_id").get<std::string>();
    s.annotation_id = j.at("annotation_id").get<std::string>();
    s.start_ms = j.at("start_ms").get<std::int64_t>();
    s.end_ms = j.at("end_ms").get<std::int64_t>();
    s.frame_timestamps_ms = j.at("frame_timestamps_ms").get<std::vector<std::int64_t>>();
    for (const auto& p : j.value("frame_paths", nlohmann::json::array())) {
      s.frame_paths.emplace_back(p.get<std::string>());
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("segment record: ") + e.what());
  }
}

std::vector<std::int64_t> keyframe_timestamps(std::int64_t start_ms, std::int64_t end_ms,
                                              const Fps& fps) {
  if (fps.num <= 0 || fps.den <= 0) throw Error(ErrorCode::ConfigInvalid, "fps must be positive");
  check_interval(start_ms, end_ms);
  using i128 = __int128;
  const i128 num = fps.num;
  const i128 den = fps.den;
  // t_k = round(k * 1000 * den / num), rounding halves up (all values >= 0).
  auto tick = [&](i128 k) { return static_cast<std::int64_t>((2 * k * 1000 * den + num) / (2 * num)); };

  i128 k_lo = static_cast<i128>(start_ms) * num / (1000 * den) - 1;
  if (k_lo < 0) k_lo = 0;
  i128 k_hi = static_cast<i128>(end_ms) * num / (1000 * den) + 2;

  std::vector<std::int64_t> out;
  for (i128 k = k_lo; k <= k_hi; ++k) {
    auto t = tick(k);
    if (t < start_ms || t > end_ms) continue;
    if (out.empty() || out.back() < t) out.push_back(t);
  }
  if (out.empty()) out.push_back(start_ms);
  return out;
}

Segment plan_keyframes(const Annotation& ann, const Fps& fps) {
  if (ann.tier_role != TierRole::FacialExpression) {
    throw Error(ErrorCode::NotFacialExpressionTier,
                "annotation " + ann.annotation_id + " is on tier " + ann.tier_id + " (" +
                    std::string(to_string(ann.tier_role)) + ")");
  }
  Segment seg;
  seg.video_id = ann.video_id;
  seg.annotation_id = ann.annotation_id;
  seg.start_ms = ann.start_ms;
  seg.end_ms = ann.end_ms;
  seg.frame_timestamps_ms = keyframe_timestamps(ann.start_ms, ann.end_ms, fps);
  return seg;
}

namespace {

std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += '\'';
  return out;
}

std::string tail(const std::string& s, std::size_t n = 2000) {
  return s.size() <= n ? s : s.substr(s.size() - n);
}

}  // namespace

std::string expand_command(std::string_view tmpl,
                           const std::vector<std::pair<std::string, std::string>>& values) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        auto name = tmpl.substr(i + 1, close - i - 1);
        auto it = std::find_if(values.begin(), values.end(),
                               [&](const auto& kv) { return kv.first == name; });
        if (it != values.end()) {
          out += shell_quote(it->second);
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

CommandResult run_command(const std::string& command) {
  std::string wrapped = "(" + command + ") 2>&1";
  FILE* pipe = ::popen(wrapped.c_str(), "r");
  if (!pipe) return {-1, "popen failed"};
  CommandResult r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  int status = ::pclose(pipe);
  if (status != -1 && WIFEXITED(status)) {
    r.exit_code = WEXITSTATUS(status);
  } else {
    r.exit_code = -1;
  }
  return r;
}

std::string frame_file_name(const Segment& seg, std::int64_t timestamp_ms) {
  return seg.video_id + "_" + seg.annotation_id + "_" + std::to_string(timestamp_ms) + ".png";
}

Segment extract_frames(const Segment& seg, const VideoRecord& video,
                       const std::filesystem::path& out_dir, const ExtractOptions& options) {
  namespace fs = std::filesystem;
  if (video.media_path.empty() || !fs::is_regular_file(video.media_path)) {
    throw Error(ErrorCode::MediaMissing, "media for video " + video.video_id +
                                             " not found: '" + video.media_path.string() + "'");
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + out_dir.string());

  Segment out = seg;
  out.frame_paths.clear();
  const auto& steps = options.pipeline.commands;
  for (auto ts : seg.frame_timestamps_ms) {
    auto final_path = out_dir / frame_file_name(seg, ts);
    auto raw_path = steps.empty() ? final_path : fs::path(final_path).replace_extension(".raw.png");

    auto cmd = expand_command(options.extract_template,
                              {{"media", video.media_path.string()},
                               {"timestamp_ms", std::to_string(ts)},
                               {"out", raw_path.string()}});
    auto r = run_command(cmd);
    if (r.exit_code != 0 || !fs::is_regular_file(raw_path)) {
      throw Error(ErrorCode::ExtractionFailed,
                  "frame " + std::to_string(ts) + " of " + video.video_id + " (exit " +
                      std::to_string(r.exit_code) + "): " + tail(r.output));
    }

    auto current = raw_path;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      auto next = i + 1 == steps.size()
                      ? final_path
                      : fs::path(final_path).replace_extension(".step" + std::to_string(i) + ".png");
      auto step = expand_command(steps[i], {{"in", current.string()}, {"out", next.string()}});
      auto sr = run_command(step);
      if (sr.exit_code != 0 || !fs::is_regular_file(next)) {
        throw Error(ErrorCode::PipelineFailed,
                    "preprocess step " + std::to_string(i) + " on " + current.string() +
                        " (exit " + std::to_string(sr.exit_code) + "): " + tail(sr.output));
      }
      if (current != final_path) fs::remove(current, ec);
      current = next;
    }
    out.frame_paths.push_back(final_path);
  }
  return out;
}

std::vector<Segment> extract_all(const std::vector<Segment>& segments,
                                 const std::vector<VideoRecord>& videos,
                                 const std::filesystem::path& out_dir,
                                 const ExtractOptions& options) {
  std::map<std::string, const VideoRecord*> by_id;
  for (const auto& v : videos) by_id[v.video_id] = &v;

  std::vector<Segment> out(segments.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto worker = [&] {
    for (;;) {
      if (failed) return;
      auto i = next++;
      if (i >= segments.size()) return;
      try {
        auto it = by_id.find(segments[i].video_id);
        if (it == by_id.end()) {
          throw Error(ErrorCode::UnknownVideo, "unknown video '" + segments[i].video_id + "'");
        }
        out[i] = extract_frames(segments[i], *it->second, out_dir, options);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        failed = true;
      }
    }
  };

  unsigned n = std::max(1u, std::min<unsigned>(options.workers,
                                               static_cast<unsigned>(segments.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

}  // namespace slvideo
