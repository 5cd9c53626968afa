#include "qgf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <unordered_map>

namespace qgf {

namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

// Keys are length-prefixed token joins, so distinct n-grams never collide.
NgramCounts count_ngrams(const TokenSequence& tokens, int n) {
  NgramCounts counts;
  const auto order = static_cast<std::size_t>(n);
  if (order == 0 || tokens.size() < order) return counts;
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < order; ++k) {
      key += std::to_string(tokens[i + k].size());
      key.push_back(':');
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

std::size_t ngram_total(const TokenSequence& tokens, int n) {
  const auto order = static_cast<std::size_t>(n);
  return tokens.size() >= order ? tokens.size() - order + 1 : 0;
}

std::size_t closest_reference_length(std::size_t hyp_len,
                                     const std::vector<TokenSequence>& refs) {
  const auto d = [&](std::size_t len) { return len > hyp_len ? len - hyp_len : hyp_len - len; };
  std::size_t best = refs.front().size();
  for (const auto& r : refs) {
    if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
  }
  return best;
}

void require_references(std::span<const TokenSequence> references) {
  if (references.empty()) throw Error("evaluation pair has no references");
}

}  // namespace

BleuResult bleu(std::span<const TokenizedPair> pairs, const BleuOptions& options) {
  if (options.max_n < 1) throw Error("BLEU max_n must be >= 1");
  const auto orders = static_cast<std::size_t>(options.max_n);
  BleuResult result;
  result.matches.assign(orders, 0);
  result.totals.assign(orders, 0);
  result.precisions.assign(orders, 0.0);

  for (const auto& pair : pairs) {
    if (pair.references.empty()) throw Error("evaluation pair has no references");
    result.hypothesis_length += pair.hypothesis.size();
    result.reference_length +=
        closest_reference_length(pair.hypothesis.size(), pair.references);
    for (int n = 1; n <= options.max_n; ++n) {
      const NgramCounts hyp = count_ngrams(pair.hypothesis, n);
      NgramCounts max_ref;
      for (const auto& ref : pair.references) {
        for (const auto& [gram, count] : count_ngrams(ref, n)) {
          auto& slot = max_ref[gram];
          slot = std::max(slot, count);
        }
      }
      std::size_t clipped = 0;
      for (const auto& [gram, count] : hyp) {
        auto it = max_ref.find(gram);
        if (it != max_ref.end()) clipped += std::min(count, it->second);
      }
      result.matches[static_cast<std::size_t>(n - 1)] += clipped;
      result.totals[static_cast<std::size_t>(n - 1)] += ngram_total(pair.hypothesis, n);
    }
  }

  if (result.hypothesis_length == 0) {
    result.warnings.emplace_back("empty hypothesis corpus; BLEU is 0");
    return result;
  }
  const double c = static_cast<double>(result.hypothesis_length);
  const double r = static_cast<double>(result.reference_length);
  result.brevity_penalty = c > r ? 1.0 : std::exp(1.0 - r / c);

  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t k = 0; k < orders; ++k) {
    if (result.totals[k] == 0) {
      zero = true;
      continue;
    }
    double numerator = static_cast<double>(result.matches[k]);
    if (numerator == 0.0 && options.smooth) numerator = kBleuEpsilon;
    result.precisions[k] = numerator / static_cast<double>(result.totals[k]);
    if (result.precisions[k] == 0.0) {
      zero = true;
    } else {
      log_sum += std::log(result.precisions[k]);
    }
  }
  result.score = zero ? 0.0
                      : result.brevity_penalty *
                            std::exp(log_sum / static_cast<double>(orders));
  return result;
}

BleuResult bleu(std::span<const EvalPair> pairs, TokenizerMode mode, const BleuOptions& options) {
  std::vector<TokenizedPair> tokenized;
  tokenized.reserve(pairs.size());
  for (const auto& p : pairs) tokenized.push_back(tokenize_pair(p, mode));
  return bleu(std::span<const TokenizedPair>(tokenized), options);
}

PRF rouge_n(const TokenSequence& hypothesis, std::span<const TokenSequence> references, int n) {
  if (n < 1) throw Error("ROUGE-N requires n >= 1");
  require_references(references);
  const NgramCounts hyp = count_ngrams(hypothesis, n);
  const std::size_t hyp_total = ngram_total(hypothesis, n);
  PRF best;
  bool first = true;
  for (const auto& ref : references) {
    const NgramCounts ref_counts = count_ngrams(ref, n);
    const std::size_t ref_total = ngram_total(ref, n);
    std::size_t overlap = 0;
    for (const auto& [gram, count] : hyp) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) overlap += std::min(count, it->second);
    }
    PRF s;
    s.precision = hyp_total ? static_cast<double>(overlap) / static_cast<double>(hyp_total) : 0.0;
    s.recall = ref_total ? static_cast<double>(overlap) / static_cast<double>(ref_total) : 0.0;
    s.f1 = harmonic_f1(s.precision, s.recall);
    if (first || s.f1 > best.f1) best = s;
    first = false;
  }
  return best;
}

PRF rouge_n(const EvalPair& pair, int n, TokenizerMode mode) {
  const TokenizedPair t = tokenize_pair(pair, mode);
  return rouge_n(t.hypothesis, t.references, n);
}

namespace {

using LcsTable = std::vector<std::vector<std::size_t>>;

LcsTable lcs_table(const TokenSequence& a, const TokenSequence& b) {
  LcsTable t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    }
  }
  return t;
}

// Positions in `ref` covered by one LCS with `hyp`; backtracks from the end,
// preferring to drop a reference token when the table ties.
std::vector<std::size_t> lcs_reference_positions(const TokenSequence& ref,
                                                 const TokenSequence& hyp) {
  const LcsTable t = lcs_table(ref, hyp);
  std::vector<std::size_t> positions;
  std::size_t i = ref.size();
  std::size_t j = hyp.size();
  while (i > 0 && j > 0) {
    if (ref[i - 1] == hyp[j - 1]) {
      positions.push_back(i - 1);
      --i;
      --j;
    } else if (t[i - 1][j] > t[i][j - 1]) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(positions.begin(), positions.end());
  return positions;
}

}  // namespace

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  if (a.empty() || b.empty()) return 0;
  // Two-row DP; the full table is only needed for backtracking.
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PRF rouge_l(const TokenSequence& hypothesis, std::span<const TokenSequence> references) {
  require_references(references);
  PRF best;
  bool first = true;
  for (const auto& ref : references) {
    const auto lcs = static_cast<double>(lcs_length(hypothesis, ref));
    PRF s;
    s.precision = hypothesis.empty() ? 0.0 : lcs / static_cast<double>(hypothesis.size());
    s.recall = ref.empty() ? 0.0 : lcs / static_cast<double>(ref.size());
    s.f1 = harmonic_f1(s.precision, s.recall);
    if (first || s.f1 > best.f1) best = s;
    first = false;
  }
  return best;
}

PRF rouge_l(const EvalPair& pair, TokenizerMode mode) {
  const TokenizedPair t = tokenize_pair(pair, mode);
  return rouge_l(t.hypothesis, t.references);
}

PRF rouge_lsum(const std::vector<TokenSequence>& hyp_sentences,
               const std::vector<TokenSequence>& ref_sentences) {
  std::unordered_map<std::string, std::size_t> hyp_left;
  std::unordered_map<std::string, std::size_t> ref_left;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
  for (const auto& s : hyp_sentences) {
    hyp_len += s.size();
    for (const auto& t : s) ++hyp_left[t];
  }
  for (const auto& s : ref_sentences) {
    ref_len += s.size();
    for (const auto& t : s) ++ref_left[t];
  }
  std::size_t hits = 0;
  for (const auto& ref : ref_sentences) {
    std::vector<std::size_t> unioned;
    for (const auto& hyp : hyp_sentences) {
      const auto positions = lcs_reference_positions(ref, hyp);
      unioned.insert(unioned.end(), positions.begin(), positions.end());
    }
    std::sort(unioned.begin(), unioned.end());
    unioned.erase(std::unique(unioned.begin(), unioned.end()), unioned.end());
    for (const std::size_t pos : unioned) {
      const std::string& token = ref[pos];
      auto h = hyp_left.find(token);
      auto r = ref_left.find(token);
      if (h != hyp_left.end() && r != ref_left.end() && h->second > 0 && r->second > 0) {
        ++hits;
        --h->second;
        --r->second;
      }
    }
  }
  PRF s;
  s.precision = hyp_len ? static_cast<double>(hits) / static_cast<double>(hyp_len) : 0.0;
  s.recall = ref_len ? static_cast<double>(hits) / static_cast<double>(ref_len) : 0.0;
  s.f1 = harmonic_f1(s.precision, s.recall);
  return s;
}

std::vector<std::string> summary_sentences(std::string_view text,
                                           const SentenceSplitter& splitter) {
  if (text.find('\n') == std::string_view::npos) return splitter.split(text);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line = normalize_text(text.substr(start, end - start));
    if (!line.empty()) lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

PRF rouge_lsum(const EvalPair& pair, TokenizerMode mode, const SentenceSplitter& splitter) {
  auto sentences = [&](const std::string& text) {
    std::vector<TokenSequence> out;
    for (const auto& s : summary_sentences(text, splitter)) {
      TokenSequence t = tokenize(s, mode);
      if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
  };
  if (pair.references.empty()) throw Error("evaluation pair has no references");
  const auto hyp = sentences(pair.hypothesis);
  PRF best;
  bool first = true;
  for (const auto& ref : pair.references) {
    const PRF s = rouge_lsum(hyp, sentences(ref));
    if (first || s.f1 > best.f1) best = s;
    first = false;
  }
  return best;
}

}  // namespace qgf
