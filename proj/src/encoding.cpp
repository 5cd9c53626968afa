#include "qgf/encoding.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <iterator>
#include <cctype>

namespace qgf {

using nlohmann::json;

std::string_view to_string(EncodingScheme scheme) {
  switch (scheme) {
    case EncodingScheme::kPrependAnswer: return "prepend_answer";
    case EncodingScheme::kHighlight: return "highlight";
    case EncodingScheme::kSepToken: return "sep_token";
  }
  return "prepend_answer";
}

EncodingScheme parse_scheme(std::string_view text) {
  if (text == "prepend_answer" || text == "prepend") return EncodingScheme::kPrependAnswer;
  if (text == "highlight" || text == "hl") return EncodingScheme::kHighlight;
  if (text == "sep_token" || text == "sep") return EncodingScheme::kSepToken;
  throw Error("unknown encoding scheme '" + std::string(text) + "'");
}

nlohmann::ordered_json example_to_json(const EncodedExample& e) {
  nlohmann::ordered_json j;
  j["record_id"] = e.record_id;
  j["scheme"] = to_string(e.scheme);
  j["input_text"] = e.input_text;
  j["target_text"] = e.target_text;
  return j;
}

EncodedExample example_from_json(const json& j) {
  EncodedExample e;
  try {
    e.record_id = j.at("record_id").get<std::string>();
    e.scheme = parse_scheme(j.at("scheme").get<std::string>());
    e.input_text = j.at("input_text").get<std::string>();
    e.target_text = j.at("target_text").get<std::string>();
  } catch (const json::exception& ex) {
    throw Error(std::string("malformed encoded example: ") + ex.what());
  }
  return e;
}

std::string serialize_example(const EncodedExample& example) {
  return example_to_json(example).dump(-1, ' ', false, json::error_handler_t::replace);
}

EncodedExample parse_example(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error&) {
    throw Error("malformed JSON");
  }
  return example_from_json(j);
}

namespace {

constexpr std::string_view kFunctionWords[] = {
    "a",     "an",    "the",   "is",    "are",   "was",  "were", "be",    "been",
    "am",    "do",    "does",  "did",   "can",   "could", "will", "would", "shall",
    "should", "may",  "might", "must",  "has",   "have", "had",  "what",  "who",
    "whom",  "whose", "which", "when",  "where", "why",  "how",  "in",    "on",
    "at",    "of",    "for",   "to",    "from",  "by",   "with", "and",   "or",
    "but",   "if",    "it",    "this",  "that",  "there", "these"};

bool is_function_word(std::string_view word) {
  std::string lower(word);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return std::find(std::begin(kFunctionWords), std::end(kFunctionWords), lower) !=
         std::end(kFunctionWords);
}

bool is_edge_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }

bool starts_uppercase(std::string_view token) {
  if (token.empty()) return false;
  const auto* bytes = reinterpret_cast<const uint8_t*>(token.data());
  int32_t i = 0;
  UChar32 c = 0;
  U8_NEXT(bytes, i, static_cast<int32_t>(token.size()), c);
  return c >= 0 && u_isupper(c);
}

bool has_digit(std::string_view token) {
  return std::any_of(token.begin(), token.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

struct Token {
  std::size_t begin = 0;  // core span, punctuation and possessive removed
  std::size_t end = 0;
  bool closes_run = false;         // trailing punctuation or possessive
  bool ends_sentence = false;      // raw token ended with . ! ?
};

std::vector<Token> entity_tokens(std::string_view q) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < q.size()) {
    while (i < q.size() && std::isspace(static_cast<unsigned char>(q[i]))) ++i;
    if (i >= q.size()) break;
    std::size_t j = i;
    while (j < q.size() && !std::isspace(static_cast<unsigned char>(q[j]))) ++j;
    Token t;
    t.begin = i;
    t.end = j;
    const char last = q[j - 1];
    t.ends_sentence = last == '.' || last == '!' || last == '?';
    while (t.begin < t.end && is_edge_punct(static_cast<unsigned char>(q[t.begin]))) ++t.begin;
    while (t.end > t.begin && is_edge_punct(static_cast<unsigned char>(q[t.end - 1]))) {
      --t.end;
      t.closes_run = true;
    }
    const std::string_view core = q.substr(t.begin, t.end - t.begin);
    for (std::string_view possessive : {"'s", "\xE2\x80\x99s"}) {
      if (core.size() > possessive.size() && core.ends_with(possessive)) {
        t.end -= possessive.size();
        t.closes_run = true;
        break;
      }
    }
    out.push_back(t);
    i = j;
  }
  return out;
}

}  // namespace

std::vector<std::string> extract_entities_default(std::string_view question) {
  std::vector<std::string> entities;
  const auto tokens = entity_tokens(question);
  std::size_t run_begin = 0;
  std::size_t run_end = 0;
  bool in_run = false;
  auto close_run = [&] {
    if (in_run) entities.emplace_back(question.substr(run_begin, run_end - run_begin));
    in_run = false;
  };

  bool sentence_initial = true;
  for (const auto& t : tokens) {
    const std::string_view core = question.substr(t.begin, t.end - t.begin);
    const bool initial = sentence_initial;
    sentence_initial = t.ends_sentence;
    if (core.empty()) {
      close_run();
      continue;
    }
    if (has_digit(core)) {
      close_run();
      entities.emplace_back(core);
      continue;
    }
    if (!starts_uppercase(core) || (initial && is_function_word(core))) {
      close_run();
      continue;
    }
    if (!in_run) run_begin = t.begin;
    run_end = t.end;
    in_run = true;
    if (t.closes_run) close_run();
  }
  close_run();
  return sanitize_entities(question, entities);
}

std::vector<std::string> sanitize_entities(std::string_view question,
                                           const std::vector<std::string>& entities) {
  std::vector<std::string> out;
  for (const auto& e : entities) {
    if (e.empty() || question.find(e) == std::string_view::npos) continue;
    if (std::find(out.begin(), out.end(), e) != out.end()) continue;
    out.push_back(e);
  }
  return out;
}

std::string yes_no_segment(std::string_view boolean_word,
                           const std::vector<std::string>& entities) {
  std::string segment(boolean_word);
  for (const auto& e : entities) {
    segment += kEntityJoiner;
    segment += e;
  }
  return segment;
}

std::string format_input(std::string_view answer, std::string_view context,
                         EncodingScheme scheme) {
  if (answer.empty()) throw UnencodableError("empty answer");
  switch (scheme) {
    case EncodingScheme::kPrependAnswer: {
      if (answer.find('\n') != std::string_view::npos ||
          context.find('\n') != std::string_view::npos) {
        throw UnencodableError("answer or context contains a newline");
      }
      std::string out(answer);
      out += '\n';
      out += context;
      return out;
    }
    case EncodingScheme::kHighlight: {
      if (context.find(kHighlightToken) != std::string_view::npos) {
        throw UnencodableError("context already contains the highlight token");
      }
      const auto pos = context.find(answer);
      if (pos == std::string_view::npos) {
        throw UnencodableError("answer is not a substring of the context");
      }
      std::string out(context.substr(0, pos));
      out += kHighlightToken;
      out += ' ';
      out += answer;
      out += ' ';
      out += kHighlightToken;
      out += context.substr(pos + answer.size());
      return out;
    }
    case EncodingScheme::kSepToken: {
      std::string out(answer);
      out += ' ';
      out += kSepToken;
      out += ' ';
      out += context;
      return out;
    }
  }
  throw UnencodableError("unknown scheme");
}

std::string strip_highlight(std::string_view input_text) {
  const std::string open = std::string(kHighlightToken) + " ";
  const std::string close = " " + std::string(kHighlightToken);
  std::string out(input_text);
  const auto a = out.find(open);
  if (a == std::string::npos) return out;
  out.erase(a, open.size());
  const auto b = out.find(close, a);
  if (b != std::string::npos) out.erase(b, close.size());
  return out;
}

std::string answer_segment(const QARecord& record, const EntityExtractor& extractor) {
  switch (record.answer_type) {
    case AnswerType::kExtractive:
    case AnswerType::kAbstractive:
      if (record.answers.empty()) throw UnencodableError("record has no answer");
      return record.answers.front();
    case AnswerType::kMultipleChoice:
      if (!record.choices || !record.correct_choice ||
          *record.correct_choice >= record.choices->size()) {
        throw UnencodableError("multiple-choice record without a valid correct choice");
      }
      return (*record.choices)[*record.correct_choice];
    case AnswerType::kYesNo: {
      if (!extractor) throw UnencodableError("yes/no record requires an entity extractor");
      std::string word;
      if (record.boolean_value) {
        word = *record.boolean_value ? "yes" : "no";
      } else if (!record.answers.empty()) {
        word = record.answers.front();
      }
      if (word.empty()) throw UnencodableError("yes/no record has no boolean answer");
      return yes_no_segment(word, sanitize_entities(record.question, extractor(record.question)));
    }
  }
  throw UnencodableError("unknown answer type");
}

EncodedExample encode(const QARecord& record, EncodingScheme scheme,
                      const EntityExtractor& extractor) {
  EncodedExample out;
  out.record_id = record.id;
  out.scheme = scheme;
  out.target_text = record.question;
  if (scheme == EncodingScheme::kPrependAnswer) {
    out.input_text = format_input(answer_segment(record, extractor), record.context, scheme);
  } else {
    if (record.answers.empty()) throw UnencodableError("record has no answer");
    out.input_text = format_input(record.answers.front(), record.context, scheme);
  }
  return out;
}

EncodeCorpusResult encode_corpus(const std::vector<QARecord>& records, EncodingScheme scheme,
                                 const EntityExtractor& extractor) {
  EncodeCorpusResult result;
  result.examples.reserve(records.size());
  for (const auto& r : records) {
    try {
      result.examples.push_back(encode(r, scheme, extractor));
      ++result.counts.encoded;
    } catch (const UnencodableError&) {
      ++result.counts.skipped;
      result.skipped_ids.push_back(r.id);
    }
  }
  return result;
}

}  // namespace qgf
