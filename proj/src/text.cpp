#include "slvideo/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "slvideo/errors.hpp"

namespace slvideo {

namespace {

icu::UnicodeString decompose_and_strip(const icu::UnicodeString& in,
                                       const icu::Normalizer2& nfd) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString decomposed = nfd.normalize(in, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::Internal, "unicode normalization failed");
  }
  icu::UnicodeString out;
  for (int32_t i = 0; i < decomposed.length();) {
    UChar32 c = decomposed.char32At(i);
    int8_t type = u_charType(c);
    if (type != U_NON_SPACING_MARK && type != U_ENCLOSING_MARK &&
        type != U_COMBINING_SPACING_MARK) {
      out.append(c);
    }
    i += U16_LENGTH(c);
  }
  return out;
}

}  // namespace

std::string normalize_text(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfd = icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::Internal, "ICU NFD normalizer unavailable");
  }
  auto text = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  text = decompose_and_strip(text, *nfd);
  text.foldCase();
  // Case folding can reintroduce decomposable characters; a second pass
  // makes the whole function a fixpoint.
  text = decompose_and_strip(text, *nfd);
  std::string out;
  text.toUTF8String(out);
  return out;
}

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace slvideo
