#include "slvideo/annotation.hpp"

#include <fnmatch.h>

#include <charconv>
#include <fstream>
#include <numeric>

#include "slvideo/errors.hpp"

namespace slvideo {

std::string_view to_string(TierRole role) {
  switch (role) {
    case TierRole::FacialExpression: return "FacialExpression";
    case TierRole::ManualGloss: return "ManualGloss";
    case TierRole::Translation: return "Translation";
    case TierRole::Other: return "Other";
  }
  return "Other";
}

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::Parsed: return "Parsed";
    case Origin::UserCreated: return "UserCreated";
    case Origin::UserEdited: return "UserEdited";
  }
  return "Parsed";
}

TierRole tier_role_from_string(std::string_view s) {
  if (s == "FacialExpression") return TierRole::FacialExpression;
  if (s == "ManualGloss") return TierRole::ManualGloss;
  if (s == "Translation") return TierRole::Translation;
  if (s == "Other") return TierRole::Other;
  throw Error(ErrorCode::BadRequest, "unknown tier role '" + std::string(s) + "'");
}

Origin origin_from_string(std::string_view s) {
  if (s == "Parsed") return Origin::Parsed;
  if (s == "UserCreated") return Origin::UserCreated;
  if (s == "UserEdited") return Origin::UserEdited;
  throw Error(ErrorCode::BadRequest, "unknown origin '" + std::string(s) + "'");
}

namespace {

std::int64_t parse_int(std::string_view s, std::string_view what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ConfigInvalid, "invalid " + std::string(what) + ": '" +
                                              std::string(s) + "'");
  }
  return v;
}

Fps reduced(std::int64_t num, std::int64_t den) {
  if (num <= 0 || den <= 0) {
    throw Error(ErrorCode::ConfigInvalid, "fps must be positive");
  }
  auto g = std::gcd(num, den);
  return Fps{num / g, den / g};
}

}  // namespace

Fps parse_fps(std::string_view text) {
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    return reduced(parse_int(text.substr(0, slash), "fps"),
                   parse_int(text.substr(slash + 1), "fps"));
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    auto frac = text.substr(dot + 1);
    if (frac.size() > 9) frac = frac.substr(0, 9);
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    std::int64_t whole = dot == 0 ? 0 : parse_int(text.substr(0, dot), "fps");
    std::int64_t part = frac.empty() ? 0 : parse_int(frac, "fps");
    return reduced(whole * den + part, den);
  }
  return reduced(parse_int(text, "fps"), 1);
}

std::string format_fps(const Fps& fps) {
  if (fps.den == 1) return std::to_string(fps.num);
  return std::to_string(fps.num) + "/" + std::to_string(fps.den);
}

TierRoleConfig::TierRoleConfig(std::vector<Pattern> patterns)
    : patterns_(std::move(patterns)) {
  int facial = 0;
  for (const auto& p : patterns_) {
    if (p.glob.empty()) throw Error(ErrorCode::ConfigInvalid, "empty tier pattern");
    if (p.role == TierRole::FacialExpression) ++facial;
  }
  if (facial != 1) {
    throw Error(ErrorCode::ConfigInvalid,
                "tier config must designate exactly one FacialExpression pattern, found " +
                    std::to_string(facial));
  }
}

TierRoleConfig TierRoleConfig::from_json(const nlohmann::json& j) {
  try {
    std::vector<Pattern> patterns;
    for (const auto& p : j.at("tier_patterns")) {
      patterns.push_back(
          {p.at("pattern").get<std::string>(),
           tier_role_from_string(p.at("role").get<std::string>())});
    }
    return TierRoleConfig(std::move(patterns));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("tier config: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("tier config: ") + e.what());
  }
}

TierRoleConfig TierRoleConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open tier config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, "tier config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json TierRoleConfig::to_json() const {
  auto arr = nlohmann::json::array();
  for (const auto& p : patterns_) {
    arr.push_back({{"pattern", p.glob}, {"role", std::string(to_string(p.role))}});
  }
  return {{"tier_patterns", arr}};
}

TierRole TierRoleConfig::resolve(std::string_view tier_id) const {
  std::string id(tier_id);
  for (const auto& p : patterns_) {
    if (::fnmatch(p.glob.c_str(), id.c_str(), 0) == 0) return p.role;
  }
  return TierRole::Other;
}

bool is_valid_id_component(std::string_view id) {
  return !id.empty() && id.find(kDocIdSeparator) == std::string_view::npos &&
         id.find('/') == std::string_view::npos;
}

std::string make_doc_id(std::string_view video_id, std::string_view annotation_id) {
  if (!is_valid_id_component(video_id) || !is_valid_id_component(annotation_id)) {
    throw Error(ErrorCode::InvalidIdentifier,
                "ids must be non-empty and free of '_' and '/': '" + std::string(video_id) +
                    "', '" + std::string(annotation_id) + "'");
  }
  std::string id(video_id);
  id += kDocIdSeparator;
  id += annotation_id;
  return id;
}

std::pair<std::string, std::string> split_doc_id(std::string_view doc_id) {
  auto pos = doc_id.find(kDocIdSeparator);
  if (pos == std::string_view::npos || pos == 0 || pos + 1 == doc_id.size() ||
      doc_id.find(kDocIdSeparator, pos + 1) != std::string_view::npos) {
    throw Error(ErrorCode::UnknownDocument, "malformed doc_id '" + std::string(doc_id) + "'");
  }
  return {std::string(doc_id.substr(0, pos)), std::string(doc_id.substr(pos + 1))};
}

nlohmann::json annotation_to_json(const Annotation& a) {
  return {{"annotation_id", a.annotation_id},
          {"tier_id", a.tier_id},
          {"tier_role", std::string(to_string(a.tier_role))},
          {"gloss", a.gloss},
          {"start_ms", a.start_ms},
          {"end_ms", a.end_ms},
          {"revision", a.revision},
          {"origin", std::string(to_string(a.origin))}};
}

Annotation annotation_from_json(const nlohmann::json& j, std::string_view video_id) {
  try {
    Annotation a;
    a.video_id = std::string(video_id);
    a.annotation_id = j.at("annotation_id").get<std::string>();
    a.tier_id = j.at("tier_id").get<std::string>();
    a.tier_role = tier_role_from_string(j.at("tier_role").get<std::string>());
    a.gloss = j.at("gloss").get<std::string>();
    a.start_ms = j.at("start_ms").get<std::int64_t>();
    a.end_ms = j.at("end_ms").get<std::int64_t>();
    a.revision = j.value("revision", 0u);
    a.origin = origin_from_string(j.value("origin", std::string("Parsed")));
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("annotation record: ") + e.what());
  }
}

void check_interval(std::int64_t start_ms, std::int64_t end_ms) {
  if (start_ms < 0 || start_ms >= end_ms) {
    throw Error(ErrorCode::InvalidInterval, "invalid interval [" + std::to_string(start_ms) +
                                                ", " + std::to_string(end_ms) + "]");
  }
}

}  // namespace slvideo
