#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace qgf {

/// Rule-based splitter: a sentence ends at '.', '!' or '?' (plus any closing
/// quotes or brackets) when followed by whitespace and an upper-case letter,
/// unless the word carrying the period is a guarded abbreviation. Input is
/// normalized first, so joining the output with single spaces reproduces
/// normalize_text(input).
class SentenceSplitter {
 public:
  SentenceSplitter();
  explicit SentenceSplitter(std::vector<std::string> abbreviations);

  std::vector<std::string> split(std::string_view text) const;

  const std::vector<std::string>& abbreviations() const { return abbreviations_; }

  static const std::vector<std::string>& default_abbreviations();

 private:
  std::vector<std::string> abbreviations_;
};

std::vector<std::string> split_sentences(std::string_view text);

}  // namespace qgf
