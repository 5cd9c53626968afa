#include "qgf/corpus_model.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cctype>

namespace qgf {

namespace {

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool has_raw_newline(std::string_view s) {
  return s.find_first_of("\n\r") != std::string_view::npos;
}

std::string nfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString normalized = normalizer->normalize(source, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

}  // namespace

std::string_view to_string(AnswerType type) {
  switch (type) {
    case AnswerType::kExtractive: return "EXTRACTIVE";
    case AnswerType::kAbstractive: return "ABSTRACTIVE";
    case AnswerType::kMultipleChoice: return "MULTIPLE_CHOICE";
    case AnswerType::kYesNo: return "YES_NO";
  }
  return "EXTRACTIVE";
}

AnswerType parse_answer_type(std::string_view text) {
  const std::string t = lower_ascii(text);
  if (t == "extractive" || t == "ex") return AnswerType::kExtractive;
  if (t == "abstractive" || t == "ab") return AnswerType::kAbstractive;
  if (t == "multiple_choice" || t == "multiple-choice" || t == "mc") {
    return AnswerType::kMultipleChoice;
  }
  if (t == "yes_no" || t == "yes-no" || t == "yn") return AnswerType::kYesNo;
  throw Error("unknown answer type '" + std::string(text) + "'");
}

std::string_view to_string(Split split) {
  return split == Split::kTrain ? "train" : "dev";
}

Split parse_split(std::string_view text) {
  const std::string t = lower_ascii(text);
  if (t == "train") return Split::kTrain;
  if (t == "dev" || t == "validation") return Split::kDev;
  throw Error("unknown split '" + std::string(text) + "'");
}

bool ValidationReport::has(std::string_view id) const {
  return std::find(violations.begin(), violations.end(), id) != violations.end();
}

ValidationReport validate_record(const QARecord& r) {
  ValidationReport report;
  report.record_id = r.id;
  auto add = [&](std::string_view v) { report.violations.emplace_back(v); };

  if (r.id.empty()) add(violation::kEmptyId);
  if (r.context.empty()) add(violation::kEmptyContext);
  if (r.question.empty()) add(violation::kEmptyQuestion);
  if (r.answers.empty()) {
    add(violation::kEmptyAnswers);
  } else if (std::any_of(r.answers.begin(), r.answers.end(),
                         [](const std::string& a) { return a.empty(); })) {
    add(violation::kEmptyAnswerText);
  }

  bool newline = has_raw_newline(r.context) || has_raw_newline(r.question);
  for (const auto& a : r.answers) newline = newline || has_raw_newline(a);
  if (newline) add(violation::kRawNewline);

  if (r.answer_type != AnswerType::kMultipleChoice &&
      (r.choices.has_value() || r.correct_choice.has_value())) {
    add(violation::kStrayChoices);
  }
  if (r.answer_type != AnswerType::kYesNo && r.boolean_value.has_value()) {
    add(violation::kStrayBoolean);
  }

  switch (r.answer_type) {
    case AnswerType::kExtractive: {
      if (!r.answers.empty()) {
        const std::string context = normalize_text(r.context);
        const bool found = std::any_of(
            r.answers.begin(), r.answers.end(), [&](const std::string& a) {
              const std::string answer = normalize_text(a);
              return !answer.empty() && context.find(answer) != std::string::npos;
            });
        if (!found) add(violation::kExtractiveSubstring);
      }
      break;
    }
    case AnswerType::kAbstractive:
      break;
    case AnswerType::kYesNo: {
      if (!r.boolean_value.has_value()) add(violation::kYnMissingBoolean);
      if (!r.answers.empty()) {
        const std::string& canonical = r.answers.front();
        if (canonical != "yes" && canonical != "no") {
          add(violation::kYnCanonicalAnswer);
        } else if (r.boolean_value.has_value() &&
                   (canonical == "yes") != *r.boolean_value) {
          add(violation::kYnBooleanMismatch);
        }
      }
      break;
    }
    case AnswerType::kMultipleChoice: {
      if (!r.choices.has_value() || r.choices->empty()) {
        add(violation::kMcMissingChoices);
      } else if (!r.correct_choice.has_value() ||
                 *r.correct_choice >= r.choices->size()) {
        add(violation::kMcChoiceRange);
      } else if (r.answers.empty() ||
                 r.answers.front() != (*r.choices)[*r.correct_choice]) {
        add(violation::kMcAnswerMismatch);
      }
      break;
    }
  }
  return report;
}

std::string normalize_text(std::string_view text) {
  const std::string composed = nfc(text);
  std::string out;
  out.reserve(composed.size());
  bool pending_space = false;
  const auto* bytes = reinterpret_cast<const uint8_t*>(composed.data());
  const auto length = static_cast<int32_t>(composed.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    if (c >= 0 && u_isUWhiteSpace(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.append(composed, static_cast<std::size_t>(start),
               static_cast<std::size_t>(i - start));
  }
  return out;
}

QARecord normalize_record(QARecord record) {
  record.context = normalize_text(record.context);
  record.question = normalize_text(record.question);
  for (auto& a : record.answers) a = normalize_text(a);
  if (record.choices) {
    for (auto& c : *record.choices) c = normalize_text(c);
  }
  return record;
}

nlohmann::ordered_json record_to_json(const QARecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["dataset"] = r.dataset;
  j["split"] = to_string(r.split);
  j["context"] = r.context;
  j["question"] = r.question;
  j["answers"] = r.answers;
  j["answer_type"] = to_string(r.answer_type);
  if (r.choices) j["choices"] = *r.choices;
  if (r.correct_choice) j["correct_choice"] = *r.correct_choice;
  if (r.boolean_value) j["boolean_value"] = *r.boolean_value ? "yes" : "no";
  if (r.unanswerable) j["unanswerable"] = true;
  return j;
}

namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const nlohmann::json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_string()) throw Error(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::string> string_list(const nlohmann::json& v, const char* key) {
  if (!v.is_array()) throw Error(std::string("field '") + key + "' must be a list");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw Error(std::string("field '") + key + "' must hold strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace

QARecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("record must be a JSON object");
  QARecord r;
  r.id = require_string(j, "id");
  r.dataset = require_string(j, "dataset");
  r.split = parse_split(require_string(j, "split"));
  r.context = require_string(j, "context");
  r.question = require_string(j, "question");
  r.answers = string_list(require(j, "answers"), "answers");
  r.answer_type = parse_answer_type(require_string(j, "answer_type"));
  if (auto it = j.find("choices"); it != j.end() && !it->is_null()) {
    r.choices = string_list(*it, "choices");
  }
  if (auto it = j.find("correct_choice"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<long long>() < 0) {
      throw Error("field 'correct_choice' must be a non-negative integer");
    }
    r.correct_choice = it->get<std::size_t>();
  }
  if (auto it = j.find("boolean_value"); it != j.end() && !it->is_null()) {
    if (it->is_boolean()) {
      r.boolean_value = it->get<bool>();
    } else if (it->is_string() && (*it == "yes" || *it == "no")) {
      r.boolean_value = (*it == "yes");
    } else {
      throw Error("field 'boolean_value' must be \"yes\" or \"no\"");
    }
  }
  if (auto it = j.find("unanswerable"); it != j.end() && it->is_boolean()) {
    r.unanswerable = it->get<bool>();
  }
  return r;
}

std::string serialize_record(const QARecord& record) {
  return record_to_json(record).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

QARecord parse_record(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("malformed JSON: ") + e.what());
  }
  return record_from_json(j);
}

}  // namespace qgf
