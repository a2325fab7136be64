#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace slvideo {

enum class TierRole { FacialExpression, ManualGloss, Translation, Other };
enum class Origin { Parsed, UserCreated, UserEdited };

std::string_view to_string(TierRole role);
std::string_view to_string(Origin origin);
TierRole tier_role_from_string(std::string_view s);
Origin origin_from_string(std::string_view s);

struct Annotation {
  std::string annotation_id;
  std::string video_id;
  std::string tier_id;
  TierRole tier_role = TierRole::Other;
  std::string gloss;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::uint32_t revision = 0;
  Origin origin = Origin::Parsed;

  bool operator==(const Annotation&) const = default;
};

// Frames per second as an exact rational, e.g. 30000/1001.
struct Fps {
  std::int64_t num = 25;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Fps&) const = default;
};

// Accepts "25", "29.97" or "30000/1001".
Fps parse_fps(std::string_view text);
std::string format_fps(const Fps& fps);

struct VideoRecord {
  std::string video_id;
  std::filesystem::path media_path;
  Fps fps;
  std::int64_t duration_ms = 1;

  bool operator==(const VideoRecord&) const = default;
};

// Tier id glob -> role. First matching pattern wins; Other when none match.
class TierRoleConfig {
 public:
  struct Pattern {
    std::string glob;
    TierRole role;
  };

  TierRoleConfig() = default;
  // Throws ConfigInvalid unless exactly one pattern maps to FacialExpression.
  explicit TierRoleConfig(std::vector<Pattern> patterns);

  static TierRoleConfig from_json(const nlohmann::json& j);
  static TierRoleConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  TierRole resolve(std::string_view tier_id) const;
  const std::vector<Pattern>& patterns() const { return patterns_; }

 private:
  std::vector<Pattern> patterns_;
};

// doc_id = <video_id>_<annotation_id>; components never contain '_'.
inline constexpr char kDocIdSeparator = '_';
bool is_valid_id_component(std::string_view id);
std::string make_doc_id(std::string_view video_id, std::string_view annotation_id);
std::pair<std::string, std::string> split_doc_id(std::string_view doc_id);

// Annotation <-> JSON record in the parsed-annotation schema (video_id is
// carried by the enclosing file, not the record).
nlohmann::json annotation_to_json(const Annotation& a);
Annotation annotation_from_json(const nlohmann::json& j, std::string_view video_id);

void check_interval(std::int64_t start_ms, std::int64_t end_ms);

}  // namespace slvideo
