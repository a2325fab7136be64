#include "slvideo/eaf.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "slvideo/errors.hpp"

namespace slvideo {

namespace pt = boost::property_tree;

namespace {

constexpr std::string_view kAttr = "<xmlattr>";

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedEaf, "malformed EAF: " + what);
}

std::optional<std::string> attribute(const pt::ptree& node, const char* name) {
  auto attrs = node.get_child_optional(pt::ptree::key_type(kAttr));
  if (!attrs) return std::nullopt;
  auto v = attrs->get_optional<std::string>(name);
  if (!v) return std::nullopt;
  return *v;
}

std::string required_attribute(const pt::ptree& node, const char* element, const char* name) {
  auto v = attribute(node, name);
  if (!v || v->empty()) {
    malformed(std::string(element) + " without " + name);
  }
  return *v;
}

std::int64_t parse_time_value(const std::string& text, const std::string& slot_id) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    malformed("TIME_VALUE of " + slot_id + " is not an integer: '" + text + "'");
  }
  if (used != text.size() || v < 0) {
    malformed("TIME_VALUE of " + slot_id + " must be a non-negative integer: '" + text + "'");
  }
  return v;
}

struct Slot {
  std::optional<std::int64_t> time_ms;
};

}  // namespace

std::vector<Annotation> parse_eaf(std::string_view eaf_bytes, std::string_view video_id,
                                  const TierRoleConfig& config,
                                  std::vector<std::string>* warnings) {
  if (eaf_bytes.substr(0, 3) == "\xEF\xBB\xBF") eaf_bytes.remove_prefix(3);

  pt::ptree tree;
  try {
    std::istringstream in{std::string(eaf_bytes)};
    pt::read_xml(in, tree, pt::xml_parser::no_comments);
  } catch (const pt::xml_parser_error& e) {
    malformed(std::string("XML error: ") + e.message() + " at line " +
              std::to_string(e.line()));
  }

  auto doc = tree.get_child_optional("ANNOTATION_DOCUMENT");
  if (!doc || tree.size() != 1) malformed("root element must be ANNOTATION_DOCUMENT");

  std::map<std::string, Slot> slots;
  for (const auto& [name, node] : *doc) {
    if (name != "TIME_ORDER") continue;
    for (const auto& [slot_name, slot] : node) {
      if (slot_name != "TIME_SLOT") continue;
      auto id = required_attribute(slot, "TIME_SLOT", "TIME_SLOT_ID");
      Slot s;
      if (auto tv = attribute(slot, "TIME_VALUE")) s.time_ms = parse_time_value(*tv, id);
      if (!slots.emplace(id, s).second) malformed("duplicate TIME_SLOT_ID " + id);
    }
  }

  auto resolve = [&](const std::string& ref, const std::string& ann_id) {
    auto it = slots.find(ref);
    if (it == slots.end()) {
      throw Error(ErrorCode::DanglingReference, "annotation " + ann_id +
                                                    " references unknown time slot " + ref);
    }
    if (!it->second.time_ms) {
      throw Error(ErrorCode::UnresolvedTimeSlot,
                  "time slot " + ref + " (annotation " + ann_id + ") has no TIME_VALUE");
    }
    return *it->second.time_ms;
  };

  std::vector<Annotation> out;
  std::set<std::string> seen_ids;
  std::set<std::string> seen_tiers;
  for (const auto& [name, tier] : *doc) {
    if (name != "TIER") continue;
    auto tier_id = required_attribute(tier, "TIER", "TIER_ID");
    if (!seen_tiers.insert(tier_id).second) malformed("duplicate TIER_ID " + tier_id);
    TierRole role = config.resolve(tier_id);

    for (const auto& [ann_name, wrapper] : tier) {
      if (ann_name != "ANNOTATION") continue;
      for (const auto& [kind, node] : wrapper) {
        if (kind == kAttr) continue;
        if (kind == "REF_ANNOTATION") {
          std::string msg = "skipping REF_ANNOTATION " +
                            attribute(node, "ANNOTATION_ID").value_or("?") + " on tier " +
                            tier_id;
          if (warnings) {
            warnings->push_back(std::move(msg));
          } else {
            log_warning(msg);
          }
          continue;
        }
        if (kind != "ALIGNABLE_ANNOTATION") malformed("unexpected element " + kind);

        Annotation a;
        a.video_id = std::string(video_id);
        a.annotation_id = required_attribute(node, "ALIGNABLE_ANNOTATION", "ANNOTATION_ID");
        a.tier_id = tier_id;
        a.tier_role = role;
        auto ref1 = required_attribute(node, "ALIGNABLE_ANNOTATION", "TIME_SLOT_REF1");
        auto ref2 = required_attribute(node, "ALIGNABLE_ANNOTATION", "TIME_SLOT_REF2");
        a.start_ms = resolve(ref1, a.annotation_id);
        a.end_ms = resolve(ref2, a.annotation_id);
        if (a.start_ms >= a.end_ms) {
          malformed("annotation " + a.annotation_id + " has start " +
                    std::to_string(a.start_ms) + " >= end " + std::to_string(a.end_ms));
        }
        auto value = node.get_child_optional("ANNOTATION_VALUE");
        if (!value) malformed("annotation " + a.annotation_id + " without ANNOTATION_VALUE");
        a.gloss = value->data();
        a.revision = 0;
        a.origin = Origin::Parsed;
        if (!seen_ids.insert(a.annotation_id).second) {
          malformed("duplicate ANNOTATION_ID " + a.annotation_id);
        }
        out.push_back(std::move(a));
      }
    }
  }

  std::sort(out.begin(), out.end(), [](const Annotation& x, const Annotation& y) {
    return std::tie(x.tier_id, x.start_ms, x.annotation_id) <
           std::tie(y.tier_id, y.start_ms, y.annotation_id);
  });
  return out;
}

std::string write_eaf(std::vector<Annotation> annotations, const VideoRecord& video) {
  std::sort(annotations.begin(), annotations.end(), [](const Annotation& x, const Annotation& y) {
    return std::tie(x.tier_id, x.start_ms, x.annotation_id) <
           std::tie(y.tier_id, y.start_ms, y.annotation_id);
  });

  // Two slots per annotation, numbered in time order.
  struct SlotUse {
    std::int64_t time_ms;
    std::size_t annotation;
    int end;  // 0 = start slot, 1 = end slot
  };
  std::vector<SlotUse> uses;
  uses.reserve(annotations.size() * 2);
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    uses.push_back({annotations[i].start_ms, i, 0});
    uses.push_back({annotations[i].end_ms, i, 1});
  }
  std::stable_sort(uses.begin(), uses.end(), [](const SlotUse& a, const SlotUse& b) {
    return std::tie(a.time_ms, a.annotation, a.end) < std::tie(b.time_ms, b.annotation, b.end);
  });
  std::vector<std::array<std::string, 2>> slot_ids(annotations.size());

  pt::ptree doc;
  doc.put("<xmlattr>.AUTHOR", "slvideo");
  doc.put("<xmlattr>.DATE", "1970-01-01T00:00:00+00:00");
  doc.put("<xmlattr>.FORMAT", "3.0");
  doc.put("<xmlattr>.VERSION", "3.0");

  pt::ptree header;
  header.put("<xmlattr>.MEDIA_FILE", "");
  header.put("<xmlattr>.TIME_UNITS", "milliseconds");
  pt::ptree media;
  media.put("<xmlattr>.MEDIA_URL", video.media_path.generic_string());
  header.add_child("MEDIA_DESCRIPTOR", media);
  doc.add_child("HEADER", header);

  pt::ptree time_order;
  for (std::size_t i = 0; i < uses.size(); ++i) {
    std::string id = "ts" + std::to_string(i + 1);
    slot_ids[uses[i].annotation][uses[i].end] = id;
    pt::ptree slot;
    slot.put("<xmlattr>.TIME_SLOT_ID", id);
    slot.put("<xmlattr>.TIME_VALUE", uses[i].time_ms);
    time_order.add_child("TIME_SLOT", slot);
  }
  doc.add_child("TIME_ORDER", time_order);

  std::size_t i = 0;
  while (i < annotations.size()) {
    pt::ptree tier;
    const std::string& tier_id = annotations[i].tier_id;
    tier.put("<xmlattr>.LINGUISTIC_TYPE_REF", "default-lt");
    tier.put("<xmlattr>.TIER_ID", tier_id);
    for (; i < annotations.size() && annotations[i].tier_id == tier_id; ++i) {
      const auto& a = annotations[i];
      pt::ptree aligned;
      aligned.put("<xmlattr>.ANNOTATION_ID", a.annotation_id);
      aligned.put("<xmlattr>.TIME_SLOT_REF1", slot_ids[i][0]);
      aligned.put("<xmlattr>.TIME_SLOT_REF2", slot_ids[i][1]);
      aligned.put("ANNOTATION_VALUE", a.gloss);
      pt::ptree wrapper;
      wrapper.add_child("ALIGNABLE_ANNOTATION", aligned);
      tier.add_child("ANNOTATION", wrapper);
    }
    doc.add_child("TIER", tier);
  }

  pt::ptree lt;
  lt.put("<xmlattr>.GRAPHIC_REFERENCES", "false");
  lt.put("<xmlattr>.LINGUISTIC_TYPE_ID", "default-lt");
  lt.put("<xmlattr>.TIME_ALIGNABLE", "true");
  doc.add_child("LINGUISTIC_TYPE", lt);

  pt::ptree root;
  root.add_child("ANNOTATION_DOCUMENT", doc);
  std::ostringstream out;
  pt::write_xml(out, root, pt::xml_writer_make_settings<std::string>(' ', 4));
  return out.str();
}

}  // namespace slvideo
