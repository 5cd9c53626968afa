#include "qgf/ingestion.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <numeric>
#include <unordered_set>

#include "qgf/checksum.hpp"

namespace qgf {

using nlohmann::json;

namespace {

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

// Shared bookkeeping for one adapter run: counts, id uniqueness, checksum.
class Collector {
 public:
  Collector(const IngestOptions& options, AnswerType adapter_type, const RecordSink& sink)
      : options_(options), sink_(sink) {
    summary_.manifest.dataset = options.dataset;
    summary_.manifest.split = options.split;
    summary_.manifest.type_label = options.type_label.empty()
                                       ? default_type_label(adapter_type)
                                       : options.type_label;
  }

  void reject(std::string_view reason, std::size_t line = 0, std::string message = {}) {
    ++summary_.manifest.raw_examples_read;
    ++summary_.manifest.rejected[std::string(reason)];
    if (!message.empty()) summary_.errors.push_back({line, std::move(message)});
  }

  void line_error(std::size_t line, std::string message) {
    summary_.errors.push_back({line, std::move(message)});
  }

  std::string next_id() const {
    return options_.dataset + "-" + std::string(to_string(options_.split)) + "-" +
           std::to_string(summary_.manifest.raw_examples_read + 1);
  }

  void offer(QARecord record) {
    record = normalize_record(std::move(record));
    if (auto rule = options_.filters.first_violation(record)) {
      reject(to_string(*rule));
      return;
    }
    const ValidationReport report = validate_record(record);
    if (!report.valid()) {
      reject(std::string(reject_reason::kInvalidPrefix) + report.violations.front());
      return;
    }
    if (!seen_ids_.insert(record.id).second) {
      reject(reject_reason::kDuplicateId);
      return;
    }
    ++summary_.manifest.raw_examples_read;
    ++summary_.manifest.accepted_count;
    hash_.update(serialize_record(record));
    hash_.update("\n");
    if (sink_) sink_(record);
  }

  IngestSummary finish() {
    summary_.manifest.checksum = hash_.digest();
    return std::move(summary_);
  }

 private:
  const IngestOptions& options_;
  const RecordSink& sink_;
  IngestSummary summary_;
  std::unordered_set<std::string> seen_ids_;
  Sha256 hash_;
};

void require_readable(std::istream& in) {
  if (!in.good()) throw Error("input stream is not readable");
}

void check_stream(std::istream& in) {
  if (in.bad()) throw Error("read error on input stream");
}

// Calls fn(line_number, parsed_object) for every non-blank line; malformed
// lines are rejected with their line number and skipped.
template <typename Fn>
void for_each_json_line(std::istream& in, Collector& collector, Fn&& fn) {
  require_readable(in);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      collector.reject(reject_reason::kMalformedJson, line_no,
                       "line " + std::to_string(line_no) + ": malformed JSON");
      continue;
    }
    fn(line_no, j);
  }
  check_stream(in);
}

std::optional<std::string> string_field(const json& j, std::initializer_list<const char*> keys) {
  for (const char* key : keys) {
    auto it = j.find(key);
    if (it != j.end() && it->is_string()) return it->get<std::string>();
  }
  return std::nullopt;
}

std::optional<std::string> id_field(const json& j, std::initializer_list<const char*> keys) {
  for (const char* key : keys) {
    auto it = j.find(key);
    if (it == j.end()) continue;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
  }
  return std::nullopt;
}

std::vector<std::string> answer_texts(const json& answers) {
  std::vector<std::string> out;
  if (!answers.is_array()) return out;
  for (const auto& a : answers) {
    if (a.is_string()) {
      out.push_back(a.get<std::string>());
    } else if (a.is_object()) {
      if (auto t = string_field(a, {"text"})) out.push_back(*t);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(FilterRuleId id) {
  switch (id) {
    case FilterRuleId::kCloze: return "cloze";
    case FilterRuleId::kUnanswerable: return "unanswerable";
    case FilterRuleId::kNonSelfContainedMc: return "non_self_contained_mc";
  }
  return "cloze";
}

FilterRuleId parse_filter_rule(std::string_view text) {
  if (text == "cloze") return FilterRuleId::kCloze;
  if (text == "unanswerable") return FilterRuleId::kUnanswerable;
  if (text == "non_self_contained_mc") return FilterRuleId::kNonSelfContainedMc;
  throw Error("unknown filter rule '" + std::string(text) + "'");
}

FilterSet FilterSet::defaults() {
  FilterSet set;
  set.add({FilterRuleId::kCloze, true});
  set.add({FilterRuleId::kUnanswerable, true});
  set.add({FilterRuleId::kNonSelfContainedMc, true});
  return set;
}

FilterSet FilterSet::none() { return FilterSet{}; }

void FilterSet::add(FilterRule rule) {
  const bool duplicate = std::any_of(rules_.begin(), rules_.end(),
                                     [&](const FilterRule& r) { return r.id == rule.id; });
  if (duplicate) throw Error("duplicate filter rule '" + std::string(to_string(rule.id)) + "'");
  rules_.push_back(rule);
}

void FilterSet::set_enabled(FilterRuleId id, bool on) {
  for (auto& r : rules_) {
    if (r.id == id) {
      r.enabled = on;
      return;
    }
  }
  add({id, on});
}

bool FilterSet::enabled(FilterRuleId id) const {
  return std::any_of(rules_.begin(), rules_.end(),
                     [&](const FilterRule& r) { return r.id == id && r.enabled; });
}

std::optional<FilterRuleId> FilterSet::first_violation(const QARecord& record) const {
  for (const auto& rule : rules_) {
    if (!rule.enabled) continue;
    switch (rule.id) {
      case FilterRuleId::kCloze: {
        for (const auto& marker : cloze_markers) {
          if (!marker.empty() && record.question.find(marker) != std::string::npos) {
            return rule.id;
          }
        }
        break;
      }
      case FilterRuleId::kUnanswerable:
        if (record.unanswerable || record.answers.empty()) return rule.id;
        break;
      case FilterRuleId::kNonSelfContainedMc: {
        if (record.answer_type != AnswerType::kMultipleChoice) break;
        const std::string q = lower_ascii(record.question);
        for (const auto& phrase : option_reference_phrases) {
          if (!phrase.empty() && q.find(lower_ascii(phrase)) != std::string::npos) {
            return rule.id;
          }
        }
        break;
      }
    }
  }
  return std::nullopt;
}

FilterResult apply_filters(std::vector<QARecord> records, const FilterSet& filters) {
  FilterResult result;
  result.kept.reserve(records.size());
  for (auto& r : records) {
    if (auto rule = filters.first_violation(r)) {
      ++result.rejected[std::string(to_string(*rule))];
    } else {
      result.kept.push_back(std::move(r));
    }
  }
  return result;
}

std::size_t CorpusManifest::rejected_total() const {
  return std::accumulate(rejected.begin(), rejected.end(), std::size_t{0},
                         [](std::size_t acc, const auto& kv) { return acc + kv.second; });
}

std::string default_type_label(AnswerType type) {
  switch (type) {
    case AnswerType::kExtractive: return "Extractive";
    case AnswerType::kAbstractive: return "Abstractive";
    case AnswerType::kMultipleChoice: return "Multiple-Choice";
    case AnswerType::kYesNo: return "Yes-No";
  }
  return "Extractive";
}

nlohmann::ordered_json manifest_to_json(const CorpusManifest& m) {
  nlohmann::ordered_json j;
  j["dataset"] = m.dataset;
  j["split"] = to_string(m.split);
  j["type"] = m.type_label;
  j["raw_examples_read"] = m.raw_examples_read;
  j["accepted_count"] = m.accepted_count;
  j["rejected"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.rejected) j["rejected"][k] = v;
  j["checksum"] = m.checksum;
  return j;
}

CorpusManifest manifest_from_json(const json& j) {
  CorpusManifest m;
  try {
    m.dataset = j.at("dataset").get<std::string>();
    m.split = parse_split(j.at("split").get<std::string>());
    m.type_label = j.value("type", std::string{});
    m.accepted_count = j.at("accepted_count").get<std::size_t>();
    if (auto it = j.find("rejected"); it != j.end()) {
      for (const auto& [k, v] : it->items()) m.rejected[k] = v.get<std::size_t>();
    }
    m.raw_examples_read = j.value("raw_examples_read", m.accepted_count + m.rejected_total());
    m.checksum = j.value("checksum", std::string{});
  } catch (const json::exception& e) {
    throw Error(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

CorpusManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path);
  try {
    return manifest_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error("manifest " + path + " is not valid JSON");
  }
}

void write_manifest(const CorpusManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write manifest " + path);
  out << manifest_to_json(manifest).dump(2) << '\n';
}

IngestSummary ingest_span_qa(std::istream& in, const IngestOptions& options,
                             const RecordSink& sink) {
  Collector c(options, options.answer_type, sink);
  for_each_json_line(in, c, [&](std::size_t line_no, const json& j) {
    if (j.is_object() && j.contains("header")) return;
    auto context = j.is_object() ? string_field(j, {"context"}) : std::nullopt;
    auto qas = j.is_object() ? j.find("qas") : j.end();
    if (!context || qas == j.end() || !qas->is_array()) {
      c.reject(reject_reason::kMalformedRecord, line_no,
               "line " + std::to_string(line_no) + ": expected \"context\" and \"qas\"");
      return;
    }
    for (const auto& qa : *qas) {
      auto question = qa.is_object() ? string_field(qa, {"question"}) : std::nullopt;
      if (!question) {
        c.reject(reject_reason::kMissingField, line_no,
                 "line " + std::to_string(line_no) + ": qa entry without question");
        continue;
      }
      QARecord r;
      r.id = id_field(qa, {"qid", "id"}).value_or(c.next_id());
      r.dataset = options.dataset;
      r.split = options.split;
      r.context = *context;
      r.question = *question;
      if (auto a = qa.find("answers"); a != qa.end()) r.answers = answer_texts(*a);
      r.answer_type = options.answer_type;
      r.unanswerable = qa.value("is_impossible", false);
      c.offer(std::move(r));
    }
  });
  return c.finish();
}

namespace {

enum class MarkerStatus { kOk, kMissing, kAmbiguous };

// Resolves the correct-option marker to an index into `options`.
MarkerStatus resolve_marker(const json& entry, const std::vector<std::string>& options,
                            std::size_t& index) {
  std::vector<std::size_t> candidates;
  for (const char* key : {"answer", "label", "correct_option"}) {
    auto it = entry.find(key);
    if (it == entry.end() || it->is_null()) continue;
    if (it->is_number_integer()) {
      const long long v = it->get<long long>();
      if (v < 0 || static_cast<std::size_t>(v) >= options.size()) return MarkerStatus::kAmbiguous;
      candidates.push_back(static_cast<std::size_t>(v));
    } else if (it->is_string()) {
      const auto s = it->get<std::string>();
      if (s.size() == 1 && std::isupper(static_cast<unsigned char>(s[0]))) {
        const auto v = static_cast<std::size_t>(s[0] - 'A');
        if (v >= options.size()) return MarkerStatus::kAmbiguous;
        candidates.push_back(v);
      } else {
        const auto n = std::count(options.begin(), options.end(), s);
        if (n != 1) return MarkerStatus::kAmbiguous;
        candidates.push_back(static_cast<std::size_t>(
            std::find(options.begin(), options.end(), s) - options.begin()));
      }
    } else {
      return MarkerStatus::kAmbiguous;
    }
  }
  if (candidates.empty()) return MarkerStatus::kMissing;
  if (std::adjacent_find(candidates.begin(), candidates.end(), std::not_equal_to<>()) !=
      candidates.end()) {
    return MarkerStatus::kAmbiguous;
  }
  index = candidates.front();
  return MarkerStatus::kOk;
}

void ingest_mc_object(const json& j, std::size_t line_no, const IngestOptions& options,
                      Collector& c) {
  auto context = j.is_object() ? string_field(j, {"context", "story", "passage", "article"})
                               : std::nullopt;
  if (!context) {
    c.reject(reject_reason::kMalformedRecord, line_no,
             "line " + std::to_string(line_no) + ": expected a passage field");
    return;
  }
  const auto base_id = id_field(j, {"id", "qid"});
  std::vector<const json*> entries;
  if (auto qs = j.find("questions"); qs != j.end() && qs->is_array()) {
    for (const auto& q : *qs) entries.push_back(&q);
  } else {
    entries.push_back(&j);
  }
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const json& e = *entries[k];
    auto question = e.is_object() ? string_field(e, {"question"}) : std::nullopt;
    auto opts = e.is_object() ? e.find("options") : e.end();
    if (e.is_object() && opts == e.end()) opts = e.find("choices");
    if (!question || opts == e.end() || !opts->is_array() || opts->empty()) {
      c.reject(reject_reason::kMissingField, line_no,
               "line " + std::to_string(line_no) + ": question or options missing");
      continue;
    }
    std::vector<std::string> options_text;
    for (const auto& o : *opts) {
      options_text.push_back(o.is_string() ? o.get<std::string>() : o.dump());
    }
    std::size_t index = 0;
    switch (resolve_marker(e, options_text, index)) {
      case MarkerStatus::kMissing:
        c.reject(reject_reason::kMissingCorrectOption);
        continue;
      case MarkerStatus::kAmbiguous:
        c.reject(reject_reason::kAmbiguousCorrectOption);
        continue;
      case MarkerStatus::kOk:
        break;
    }
    QARecord r;
    if (auto own_id = id_field(e, {"id", "qid"}); own_id && &e != &j) {
      r.id = *own_id;
    } else if (base_id) {
      r.id = entries.size() > 1 ? *base_id + "-" + std::to_string(k) : *base_id;
    } else {
      r.id = c.next_id();
    }
    r.dataset = options.dataset;
    r.split = options.split;
    r.context = *context;
    r.question = *question;
    r.answer_type = AnswerType::kMultipleChoice;
    r.answers = {options_text[index]};
    r.choices = std::move(options_text);
    r.correct_choice = index;
    c.offer(std::move(r));
  }
}

}  // namespace

IngestSummary ingest_multiple_choice(std::istream& in, const IngestOptions& options,
                                     const RecordSink& sink) {
  Collector c(options, AnswerType::kMultipleChoice, sink);
  require_readable(in);
  // A file whose first non-blank character is '[' holds one JSON array.
  while (in && std::isspace(in.peek())) in.get();
  if (in.peek() == '[') {
    json all;
    try {
      all = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(std::string("multiple-choice input is not a valid JSON array: ") + e.what());
    }
    for (const auto& j : all) ingest_mc_object(j, 0, options, c);
    return c.finish();
  }
  in.clear();
  for_each_json_line(in, c, [&](std::size_t line_no, const json& j) {
    ingest_mc_object(j, line_no, options, c);
  });
  return c.finish();
}

IngestSummary ingest_boolean(std::istream& in, const IngestOptions& options,
                             const RecordSink& sink) {
  Collector c(options, AnswerType::kYesNo, sink);
  for_each_json_line(in, c, [&](std::size_t line_no, const json& j) {
    auto question = j.is_object() ? string_field(j, {"question"}) : std::nullopt;
    auto passage = j.is_object() ? string_field(j, {"passage", "context"}) : std::nullopt;
    if (!question || !passage) {
      c.reject(reject_reason::kMissingField, line_no,
               "line " + std::to_string(line_no) + ": question or passage missing");
      return;
    }
    auto label = j.find("answer");
    if (label == j.end() || label->is_null()) label = j.find("label");
    if (label == j.end() || label->is_null()) {
      c.reject(reject_reason::kMissingLabel);
      return;
    }
    std::optional<bool> value;
    if (label->is_boolean()) {
      value = label->get<bool>();
    } else if (label->is_string()) {
      const auto s = lower_ascii(label->get<std::string>());
      if (s == "true" || s == "yes") value = true;
      if (s == "false" || s == "no") value = false;
    }
    if (!value) {
      c.reject(reject_reason::kInvalidLabel);
      return;
    }
    QARecord r;
    r.id = id_field(j, {"id", "qid"}).value_or(c.next_id());
    r.dataset = options.dataset;
    r.split = options.split;
    r.context = *passage;
    r.question = *question;
    r.answer_type = AnswerType::kYesNo;
    r.boolean_value = *value;
    r.answers = {*value ? "yes" : "no"};
    c.offer(std::move(r));
  });
  return c.finish();
}

IngestSummary ingest_unified(std::istream& in, const IngestOptions& options,
                             const RecordSink& sink) {
  Collector c(options, options.answer_type, sink);
  for_each_json_line(in, c, [&](std::size_t line_no, const json& j) {
    QARecord r;
    try {
      r = record_from_json(j);
    } catch (const Error& e) {
      c.reject(reject_reason::kMalformedRecord, line_no,
               "line " + std::to_string(line_no) + ": " + e.what());
      return;
    }
    c.offer(std::move(r));
  });
  return c.finish();
}

SourceFormat parse_source_format(std::string_view text) {
  if (text == "span" || text == "mrqa") return SourceFormat::kSpanQa;
  if (text == "mc" || text == "multiple_choice") return SourceFormat::kMultipleChoice;
  if (text == "boolean" || text == "boolq") return SourceFormat::kBoolean;
  if (text == "unified") return SourceFormat::kUnified;
  throw Error("unknown source format '" + std::string(text) + "'");
}

IngestSummary ingest(SourceFormat format, std::istream& in, const IngestOptions& options,
                     const RecordSink& sink) {
  switch (format) {
    case SourceFormat::kSpanQa: return ingest_span_qa(in, options, sink);
    case SourceFormat::kMultipleChoice: return ingest_multiple_choice(in, options, sink);
    case SourceFormat::kBoolean: return ingest_boolean(in, options, sink);
    case SourceFormat::kUnified: return ingest_unified(in, options, sink);
  }
  throw Error("unknown source format");
}

IngestResult ingest(SourceFormat format, std::istream& in, const IngestOptions& options) {
  IngestResult result;
  IngestSummary summary =
      ingest(format, in, options, [&](const QARecord& r) { result.records.push_back(r); });
  result.manifest = std::move(summary.manifest);
  result.errors = std::move(summary.errors);
  return result;
}

}  // namespace qgf
