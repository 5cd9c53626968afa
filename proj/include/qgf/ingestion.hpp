#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qgf/corpus_model.hpp"

namespace qgf {

enum class FilterRuleId { kCloze, kUnanswerable, kNonSelfContainedMc };

std::string_view to_string(FilterRuleId id);
FilterRuleId parse_filter_rule(std::string_view text);

struct FilterRule {
  FilterRuleId id;
  bool enabled = true;
};

/// The corpus restrictions applied before training: no cloze questions, no
/// unanswerable questions, no multiple-choice questions that only make sense
/// next to their options.
class FilterSet {
 public:
  /// All three rules enabled with the default patterns.
  static FilterSet defaults();
  static FilterSet none();

  /// Throws qgf::Error if the rule id is already present.
  void add(FilterRule rule);
  void set_enabled(FilterRuleId id, bool enabled);
  bool enabled(FilterRuleId id) const;
  const std::vector<FilterRule>& rules() const { return rules_; }

  /// Literal substrings marking a cloze blank (case-sensitive).
  std::vector<std::string> cloze_markers{"@placeholder", "___", "[MASK]"};
  /// Phrases (matched case-insensitively) by which an MC question refers to
  /// its own options.
  std::vector<std::string> option_reference_phrases{"which of the following",
                                                    "which one of these"};

  /// First enabled rule the record trips, in rule order.
  std::optional<FilterRuleId> first_violation(const QARecord& record) const;

 private:
  std::vector<FilterRule> rules_;
};

struct FilterResult {
  std::vector<QARecord> kept;
  std::map<std::string, std::size_t> rejected;  // rule id -> count
};

FilterResult apply_filters(std::vector<QARecord> records, const FilterSet& filters);

struct CorpusManifest {
  std::string dataset;
  Split split = Split::kTrain;
  // Table-style type label ("Extractive", "Yes-No", ...); configurable per
  // dataset because a source's nominal label may differ from its records.
  std::string type_label;
  std::size_t raw_examples_read = 0;
  std::size_t accepted_count = 0;
  std::map<std::string, std::size_t> rejected;
  std::string checksum;

  std::size_t rejected_total() const;
  bool conserves() const { return raw_examples_read == accepted_count + rejected_total(); }
};

nlohmann::ordered_json manifest_to_json(const CorpusManifest& manifest);
CorpusManifest manifest_from_json(const nlohmann::json& j);
CorpusManifest read_manifest(const std::string& path);
void write_manifest(const CorpusManifest& manifest, const std::string& path);

std::string default_type_label(AnswerType type);

struct IngestOptions {
  std::string dataset;
  Split split = Split::kTrain;
  // Span adapter only: EXTRACTIVE for MRQA sources, ABSTRACTIVE for
  // free-form sources such as NarrativeQA.
  AnswerType answer_type = AnswerType::kExtractive;
  // Empty means default_type_label(answer_type of the adapter).
  std::string type_label;
  FilterSet filters = FilterSet::defaults();
};

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct IngestSummary {
  CorpusManifest manifest;
  std::vector<LineError> errors;
};

struct IngestResult {
  std::vector<QARecord> records;
  CorpusManifest manifest;
  std::vector<LineError> errors;
};

using RecordSink = std::function<void(const QARecord&)>;

// Rejection reasons produced by the adapters themselves (filter rejections
// use the FilterRuleId names).
namespace reject_reason {
inline constexpr std::string_view kMalformedJson = "malformed_json";
inline constexpr std::string_view kMalformedRecord = "malformed_record";
inline constexpr std::string_view kMissingField = "missing_field";
inline constexpr std::string_view kMissingCorrectOption = "missing_correct_option";
inline constexpr std::string_view kAmbiguousCorrectOption = "ambiguous_correct_option";
inline constexpr std::string_view kMissingLabel = "missing_label";
inline constexpr std::string_view kInvalidLabel = "invalid_label";
inline constexpr std::string_view kDuplicateId = "duplicate_id";
inline constexpr std::string_view kInvalidPrefix = "invalid:";
}  // namespace reject_reason

/// MRQA layout: optional {"header": ...} line, then one JSON object per line
/// with "context" and a "qas" list of {"qid"/"id", "question", "answers"}.
IngestSummary ingest_span_qa(std::istream& in, const IngestOptions& options,
                             const RecordSink& sink);
/// One JSON object per line (or a single JSON array) with a passage, either a
/// flat question/options/answer triple or a "questions" list of them.
IngestSummary ingest_multiple_choice(std::istream& in, const IngestOptions& options,
                                     const RecordSink& sink);
/// BoolQ layout: {"question", "passage", "answer": true|false}.
IngestSummary ingest_boolean(std::istream& in, const IngestOptions& options,
                             const RecordSink& sink);
/// Unified QARecord JSONL, re-validated and re-filtered.
IngestSummary ingest_unified(std::istream& in, const IngestOptions& options,
                             const RecordSink& sink);

enum class SourceFormat { kSpanQa, kMultipleChoice, kBoolean, kUnified };
SourceFormat parse_source_format(std::string_view text);

IngestSummary ingest(SourceFormat format, std::istream& in, const IngestOptions& options,
                     const RecordSink& sink);
/// Collects the emitted records in memory.
IngestResult ingest(SourceFormat format, std::istream& in, const IngestOptions& options);

}  // namespace qgf
