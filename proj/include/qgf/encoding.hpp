#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qgf/corpus_model.hpp"

namespace qgf {

enum class EncodingScheme {
  kPrependAnswer,  // "{answer}\n{context}"
  kHighlight,      // context with the answer span wrapped in <hl> tokens
  kSepToken,       // "{answer} [SEP] {context}"
};

std::string_view to_string(EncodingScheme scheme);
/// Accepts the canonical names and the CLI aliases prepend/highlight/hl/sep.
EncodingScheme parse_scheme(std::string_view text);

inline constexpr std::string_view kHighlightToken = "<hl>";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kEntityJoiner = " + ";

struct EncodedExample {
  std::string record_id;
  EncodingScheme scheme = EncodingScheme::kPrependAnswer;
  std::string input_text;
  std::string target_text;

  bool operator==(const EncodedExample&) const = default;
};

nlohmann::ordered_json example_to_json(const EncodedExample& example);
EncodedExample example_from_json(const nlohmann::json& j);
std::string serialize_example(const EncodedExample& example);
EncodedExample parse_example(std::string_view line);

/// Question text -> ordered entity strings. Implementations should return
/// substrings of the question; encode() drops anything else and duplicates.
using EntityExtractor = std::function<std::vector<std::string>(std::string_view question)>;

/// Capitalized-token runs and digit-bearing tokens, in question order.
std::vector<std::string> extract_entities_default(std::string_view question);

/// Keeps entities that occur in `question`, first occurrence wins.
std::vector<std::string> sanitize_entities(std::string_view question,
                                           const std::vector<std::string>& entities);

class UnencodableError : public Error {
 public:
  using Error::Error;
};

/// "yes" or "no" followed by " + entity" for each entity.
std::string yes_no_segment(std::string_view boolean_word,
                           const std::vector<std::string>& entities);

/// Builds the model input from an already-chosen answer segment. Throws
/// UnencodableError for an empty answer, and for HIGHLIGHT when the answer is
/// not a substring of the context.
std::string format_input(std::string_view answer, std::string_view context,
                         EncodingScheme scheme);

/// Inverse of the highlight wrapping: removes the two decorated sentinels.
std::string strip_highlight(std::string_view input_text);

/// The answer text placed in front of the context under PREPEND_ANSWER.
/// Requires `extractor` for YES_NO records.
std::string answer_segment(const QARecord& record, const EntityExtractor& extractor);

EncodedExample encode(const QARecord& record, EncodingScheme scheme,
                      const EntityExtractor& extractor);

struct EncodeCounts {
  std::size_t encoded = 0;
  std::size_t skipped = 0;
};

struct EncodeCorpusResult {
  std::vector<EncodedExample> examples;
  EncodeCounts counts;
  std::vector<std::string> skipped_ids;
};

/// Order-preserving; unencodable records are tallied and skipped.
EncodeCorpusResult encode_corpus(const std::vector<QARecord>& records, EncodingScheme scheme,
                                 const EntityExtractor& extractor);

}  // namespace qgf
