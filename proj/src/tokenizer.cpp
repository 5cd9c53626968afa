#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <cctype>

#include "qgf/metrics.hpp"

namespace qgf {

namespace {

bool is_punct(UChar32 c) {
  if (c < 0x80) return std::ispunct(static_cast<int>(c)) != 0;
  return u_ispunct(c) != 0;
}

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace

std::string_view to_string(TokenizerMode mode) {
  return mode == TokenizerMode::kDefault ? "default" : "as_is";
}

TokenizerMode parse_tokenizer_mode(std::string_view text) {
  if (text == "default") return TokenizerMode::kDefault;
  if (text == "as_is" || text == "as-is") return TokenizerMode::kAsIs;
  throw Error("unknown tokenizer mode '" + std::string(text) + "'");
}

TokenSequence tokenize(std::string_view text, TokenizerMode mode) {
  TokenSequence tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) c = 0xFFFD;
    if (u_isUWhiteSpace(c)) {
      flush();
      continue;
    }
    if (mode == TokenizerMode::kAsIs) {
      current.append(text.substr(static_cast<std::size_t>(start),
                                 static_cast<std::size_t>(i - start)));
      continue;
    }
    if (is_punct(c)) {
      flush();
      append_utf8(current, c);
      flush();
      continue;
    }
    append_utf8(current, u_tolower(c));
  }
  flush();
  return tokens;
}

TokenizedPair tokenize_pair(const EvalPair& pair, TokenizerMode mode) {
  TokenizedPair out;
  out.hypothesis = tokenize(pair.hypothesis, mode);
  out.references.reserve(pair.references.size());
  for (const auto& r : pair.references) out.references.push_back(tokenize(r, mode));
  return out;
}

double harmonic_f1(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

}  // namespace qgf
