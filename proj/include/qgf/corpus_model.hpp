#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace qgf {

/// Base class for every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AnswerType { kExtractive, kAbstractive, kMultipleChoice, kYesNo };

std::string_view to_string(AnswerType type);
/// Accepts the canonical upper-case names and the short tags EX/AB/MC/YN,
/// case-insensitively. Throws qgf::Error on anything else.
AnswerType parse_answer_type(std::string_view text);

enum class Split { kTrain, kDev };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

/// One normalized QA example. Context, question and answers correspond to
/// the passage, question and answer of the answer-aware QG task.
struct QARecord {
  std::string id;
  std::string dataset;
  Split split = Split::kTrain;
  std::string context;
  std::string question;
  std::vector<std::string> answers;  // answers[0] is canonical
  AnswerType answer_type = AnswerType::kExtractive;
  std::optional<std::vector<std::string>> choices;  // MULTIPLE_CHOICE only
  std::optional<std::size_t> correct_choice;        // MULTIPLE_CHOICE only
  std::optional<bool> boolean_value;                // YES_NO only
  // Set by adapters when the source marks the question as unanswerable.
  bool unanswerable = false;

  bool operator==(const QARecord&) const = default;
};

// Invariant identifiers reported by validate_record.
namespace violation {
inline constexpr std::string_view kEmptyId = "empty-id";
inline constexpr std::string_view kEmptyContext = "empty-context";
inline constexpr std::string_view kEmptyQuestion = "empty-question";
inline constexpr std::string_view kEmptyAnswers = "empty-answers";
inline constexpr std::string_view kEmptyAnswerText = "empty-answer-text";
inline constexpr std::string_view kExtractiveSubstring = "extractive-substring";
inline constexpr std::string_view kYnMissingBoolean = "yn-missing-boolean";
inline constexpr std::string_view kYnCanonicalAnswer = "yn-canonical-answer";
inline constexpr std::string_view kYnBooleanMismatch = "yn-boolean-mismatch";
inline constexpr std::string_view kMcMissingChoices = "mc-missing-choices";
inline constexpr std::string_view kMcChoiceRange = "mc-choice-out-of-range";
inline constexpr std::string_view kMcAnswerMismatch = "mc-answer-mismatch";
inline constexpr std::string_view kRawNewline = "raw-newline";
inline constexpr std::string_view kStrayChoices = "choices-on-non-mc";
inline constexpr std::string_view kStrayBoolean = "boolean-on-non-yn";
}  // namespace violation

struct ValidationReport {
  std::string record_id;
  std::vector<std::string> violations;

  bool valid() const { return violations.empty(); }
  bool has(std::string_view id) const;
};

/// Checks every QARecord invariant and reports all violations found.
/// Pure; never throws.
ValidationReport validate_record(const QARecord& record);

/// NFC, newlines to spaces, whitespace runs collapsed, ends trimmed.
/// Ill-formed UTF-8 sequences are replaced with U+FFFD.
std::string normalize_text(std::string_view text);

/// Applies normalize_text to every text field of the record.
QARecord normalize_record(QARecord record);

nlohmann::ordered_json record_to_json(const QARecord& record);
/// Throws qgf::Error naming the offending field.
QARecord record_from_json(const nlohmann::json& j);

/// One JSONL line (no trailing newline). Key order is fixed so the bytes are
/// stable across runs.
std::string serialize_record(const QARecord& record);
QARecord parse_record(std::string_view line);

}  // namespace qgf
