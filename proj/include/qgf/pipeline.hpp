#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qgf/inference_clients.hpp"
#include "qgf/sentence_splitter.hpp"

namespace qgf {

struct SourceSpan {
  std::size_t sentence_index = 0;  // position in the summary
  // Byte range of the normalized document given to the QG model as context.
  std::size_t context_begin = 0;
  std::size_t context_end = 0;
};

struct QAPair {
  std::string question;
  std::string answer;
  SourceSpan source_span;
};

struct PipelineError {
  std::size_t sentence_index = 0;
  std::string answer;
  std::string message;
};

struct PipelineOptions {
  EncodingScheme scheme = EncodingScheme::kPrependAnswer;
  DecodeOptions decode;
  DecodeOptions summary_decode{256, 4};
  std::size_t parallelism = 4;
  // When set, the context is the document sentence sharing the most tokens
  // with the summary sentence plus this many neighbours on each side.
  std::optional<std::size_t> window;
  SentenceSplitter splitter;
};

struct PipelineResult {
  std::string summary;
  std::vector<QAPair> pairs;          // summary sentence order
  std::vector<PipelineError> errors;  // per-sentence QG failures
  std::vector<std::string> warnings;
};

/// Summarizes the document, splits the summary into sentences and generates
/// one question per sentence with that sentence as the answer. A summarizer
/// failure propagates; a failed QG call becomes an error entry.
PipelineResult summarize_then_qg(const std::string& document, const GenerationClient& summarizer,
                                 const GenerationClient& qg, const PipelineOptions& options = {});

nlohmann::ordered_json pair_to_json(const QAPair& pair);
nlohmann::ordered_json error_to_json(const PipelineError& error);

}  // namespace qgf
