#pragma once

#include <string>
#include <string_view>

namespace slvideo {

// Canonical decomposition, combining marks removed, case folded.
// "Dúvida" and "DUVIDA" both map to "duvida". Idempotent.
std::string normalize_text(std::string_view utf8);

// ASCII whitespace trim.
std::string_view trim(std::string_view s);

}  // namespace slvideo
