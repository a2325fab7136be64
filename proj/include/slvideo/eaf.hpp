#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "slvideo/annotation.hpp"

namespace slvideo {

// Parses the supported EAF subset: TIME_ORDER/TIME_SLOT and
// TIER/ANNOTATION/ALIGNABLE_ANNOTATION. REF_ANNOTATION elements are skipped
// with a warning (appended to *warnings when given, logged otherwise).
//
// Result is sorted by (tier_id, start_ms, annotation_id), so element order
// in the XML does not matter.
//
// Throws MalformedEaf, UnresolvedTimeSlot or DanglingReference.
std::vector<Annotation> parse_eaf(std::string_view eaf_bytes, std::string_view video_id,
                                  const TierRoleConfig& config,
                                  std::vector<std::string>* warnings = nullptr);

// Serializes annotations into the supported EAF subset. Each annotation gets
// its own pair of time slots; slot ids are assigned in time order. Output is
// deterministic for a given input set.
std::string write_eaf(std::vector<Annotation> annotations, const VideoRecord& video);

}  // namespace slvideo
