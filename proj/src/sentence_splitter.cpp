#include "qgf/sentence_splitter.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>

#include "qgf/corpus_model.hpp"

namespace qgf {

namespace {

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

bool uppercase_at(std::string_view text, std::size_t pos) {
  if (pos >= text.size()) return false;
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  auto i = static_cast<int32_t>(pos);
  UChar32 c = 0;
  U8_NEXT(bytes, i, static_cast<int32_t>(text.size()), c);
  return c >= 0 && u_isupper(c);
}

}  // namespace

const std::vector<std::string>& SentenceSplitter::default_abbreviations() {
  static const std::vector<std::string> kDefaults = {
      "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "Sr.", "Jr.", "St.", "vs.", "etc.", "e.g.", "i.e."};
  return kDefaults;
}

SentenceSplitter::SentenceSplitter() : abbreviations_(default_abbreviations()) {}

SentenceSplitter::SentenceSplitter(std::vector<std::string> abbreviations)
    : abbreviations_(std::move(abbreviations)) {}

std::vector<std::string> SentenceSplitter::split(std::string_view raw) const {
  const std::string text = normalize_text(raw);
  std::vector<std::string> sentences;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_terminator(text[i])) continue;
    std::size_t end = i + 1;
    while (end < text.size() && (is_terminator(text[end]) || is_closer(text[end]))) ++end;
    // normalized text has single spaces only
    if (end >= text.size() || text[end] != ' ' || !uppercase_at(text, end + 1)) {
      i = end - 1;
      continue;
    }
    const std::size_t word_start = text.rfind(' ', i) == std::string::npos
                                       ? 0
                                       : text.rfind(' ', i) + 1;
    const std::string_view word(text.data() + word_start, i + 1 - word_start);
    if (std::find(abbreviations_.begin(), abbreviations_.end(), word) != abbreviations_.end()) {
      i = end - 1;
      continue;
    }
    sentences.emplace_back(text.substr(start, end - start));
    start = end + 1;
    i = end;
  }
  if (start < text.size()) sentences.emplace_back(text.substr(start));
  return sentences;
}

std::vector<std::string> split_sentences(std::string_view text) {
  static const SentenceSplitter kDefault;
  return kDefault.split(text);
}

}  // namespace qgf
