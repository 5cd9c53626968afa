#include "qgf/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

#include "qgf/metrics.hpp"

namespace qgf {

namespace {

struct Window {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Byte offsets of each splitter sentence inside the normalized document.
std::vector<Window> sentence_offsets(const std::string& document,
                                     const std::vector<std::string>& sentences) {
  std::vector<Window> out;
  std::size_t pos = 0;
  for (const auto& s : sentences) {
    const auto at = document.find(s, pos);
    const std::size_t begin = at == std::string::npos ? pos : at;
    out.push_back({begin, begin + s.size()});
    pos = begin + s.size();
  }
  return out;
}

Window context_window(const std::string& document, const std::vector<std::string>& doc_sentences,
                      const std::vector<Window>& offsets, const std::string& answer,
                      std::size_t radius) {
  if (doc_sentences.empty()) return {0, document.size()};
  const auto answer_tokens = tokenize(answer);
  const std::set<std::string> wanted(answer_tokens.begin(), answer_tokens.end());
  std::size_t best = 0;
  std::size_t best_overlap = 0;
  for (std::size_t i = 0; i < doc_sentences.size(); ++i) {
    const auto toks = tokenize(doc_sentences[i]);
    const std::set<std::string> unique(toks.begin(), toks.end());
    std::size_t overlap = 0;
    for (const auto& t : unique) overlap += wanted.count(t);
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = i;
    }
  }
  const std::size_t first = best > radius ? best - radius : 0;
  const std::size_t last = std::min(doc_sentences.size() - 1, best + radius);
  return {offsets[first].begin, offsets[last].end};
}

}  // namespace

PipelineResult summarize_then_qg(const std::string& raw_document,
                                 const GenerationClient& summarizer, const GenerationClient& qg,
                                 const PipelineOptions& options) {
  const std::string document = normalize_text(raw_document);
  if (document.empty()) throw Error("pipeline document is empty");

  PipelineResult result;
  GenerationRequest request;
  request.input_text = document;
  request.max_output_tokens = options.summary_decode.max_output_tokens;
  request.beam = options.summary_decode.beam;
  result.summary = normalize_text(summarizer.generate(request).output_text);

  const std::vector<std::string> sentences = options.splitter.split(result.summary);
  if (sentences.empty()) {
    result.warnings.emplace_back("summarizer returned empty text; no questions generated");
    return result;
  }

  std::vector<std::string> doc_sentences;
  std::vector<Window> offsets;
  if (options.window) {
    doc_sentences = options.splitter.split(document);
    offsets = sentence_offsets(document, doc_sentences);
  }

  struct Slot {
    std::optional<QAPair> pair;
    std::optional<PipelineError> error;
  };
  std::vector<Slot> slots(sentences.size());
  auto work = [&](std::size_t i) {
    const std::string& answer = sentences[i];
    const Window w = options.window
                         ? context_window(document, doc_sentences, offsets, answer, *options.window)
                         : Window{0, document.size()};
    try {
      QAPair pair;
      pair.answer = answer;
      pair.question = generate_question(answer, std::string_view(document).substr(w.begin, w.end - w.begin),
                                        options.scheme, qg, options.decode);
      pair.source_span = {i, w.begin, w.end};
      slots[i].pair = std::move(pair);
    } catch (const std::exception& e) {
      slots[i].error = PipelineError{i, answer, e.what()};
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(options.parallelism, 1, sentences.size());
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < sentences.size(); i = next++) work(i);
      });
    }
  }
  for (auto& s : slots) {
    if (s.pair) result.pairs.push_back(std::move(*s.pair));
    if (s.error) result.errors.push_back(std::move(*s.error));
  }
  return result;
}

nlohmann::ordered_json pair_to_json(const QAPair& pair) {
  nlohmann::ordered_json j;
  j["question"] = pair.question;
  j["answer"] = pair.answer;
  j["source_span"] = {{"sentence_index", pair.source_span.sentence_index},
                      {"context_begin", pair.source_span.context_begin},
                      {"context_end", pair.source_span.context_end}};
  return j;
}

nlohmann::ordered_json error_to_json(const PipelineError& error) {
  nlohmann::ordered_json j;
  j["sentence_index"] = error.sentence_index;
  j["answer"] = error.answer;
  j["error"] = error.message;
  return j;
}

}  // namespace qgf
