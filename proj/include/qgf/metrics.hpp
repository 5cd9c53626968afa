#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qgf/corpus_model.hpp"
#include "qgf/sentence_splitter.hpp"

namespace qgf {

enum class TokenizerMode {
  kDefault,  // lowercase, whitespace split, each punctuation character its own token
  kAsIs,     // whitespace split only
};

std::string_view to_string(TokenizerMode mode);
TokenizerMode parse_tokenizer_mode(std::string_view text);

using TokenSequence = std::vector<std::string>;

/// Punctuation is any ASCII ispunct() character or any code point in a
/// Unicode P* category. Lowercasing uses simple per-code-point case mapping.
TokenSequence tokenize(std::string_view text, TokenizerMode mode = TokenizerMode::kDefault);

struct EvalPair {
  std::string id;
  std::string hypothesis;
  std::vector<std::string> references;  // non-empty
};

struct TokenizedPair {
  TokenSequence hypothesis;
  std::vector<TokenSequence> references;
};

TokenizedPair tokenize_pair(const EvalPair& pair, TokenizerMode mode);

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// 2PR/(P+R), or 0 when P+R == 0.
double harmonic_f1(double precision, double recall);

// ---------------------------------------------------------------- BLEU

struct BleuOptions {
  int max_n = 4;
  bool smooth = false;  // replace zero match counts by kBleuEpsilon
};

inline constexpr double kBleuEpsilon = 1e-9;

struct BleuResult {
  double score = 0.0;
  std::vector<double> precisions;          // per order, pooled
  std::vector<std::size_t> matches;        // clipped n-gram matches per order
  std::vector<std::size_t> totals;         // hypothesis n-grams per order
  double brevity_penalty = 0.0;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;        // closest reference per pair
  std::vector<std::string> warnings;
};

/// Corpus BLEU: counts are pooled over all pairs before the geometric mean.
/// Clipping uses the per-n-gram maximum count across a pair's references;
/// the effective reference length takes the closest reference (shorter on
/// ties).
BleuResult bleu(std::span<const TokenizedPair> pairs, const BleuOptions& options = {});
BleuResult bleu(std::span<const EvalPair> pairs, TokenizerMode mode = TokenizerMode::kDefault,
                const BleuOptions& options = {});

// ---------------------------------------------------------------- ROUGE

/// Multiset n-gram overlap; the reference with the highest F1 wins.
PRF rouge_n(const TokenSequence& hypothesis, std::span<const TokenSequence> references, int n);
PRF rouge_n(const EvalPair& pair, int n, TokenizerMode mode = TokenizerMode::kDefault);

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b);

PRF rouge_l(const TokenSequence& hypothesis, std::span<const TokenSequence> references);
PRF rouge_l(const EvalPair& pair, TokenizerMode mode = TokenizerMode::kDefault);

/// Summary-level ROUGE-L over sentence lists. For each reference sentence the
/// LCS hits against every hypothesis sentence are unioned; a hit is credited
/// only while both sides still have unused occurrences of that token.
PRF rouge_lsum(const std::vector<TokenSequence>& hypothesis_sentences,
               const std::vector<TokenSequence>& reference_sentences);
/// Splits on newlines when the text has any, otherwise with `splitter`.
PRF rouge_lsum(const EvalPair& pair, TokenizerMode mode = TokenizerMode::kDefault,
               const SentenceSplitter& splitter = SentenceSplitter{});

std::vector<std::string> summary_sentences(std::string_view text,
                                           const SentenceSplitter& splitter);

// ---------------------------------------------------------------- METEOR

std::string porter_stem(std::string_view word);

struct MeteorOptions {
  bool stem_stage = true;
  // Upper bound on alignment search nodes per pair; the best alignment found
  // so far is used once it is exhausted.
  std::size_t search_budget = 200000;
};

struct MeteorResult {
  double score = 0.0;
  std::size_t matches = 0;
  std::size_t chunks = 0;
  double precision = 0.0;
  double recall = 0.0;
  double fmean = 0.0;
  double penalty = 0.0;
};

/// Exact stage, then stem stage on what remains; each stage takes a maximum
/// matching and among those the alignment with the fewest chunks.
/// Fmean = 10PR/(R+9P), penalty = 0.5 (chunks/m)^3. Best reference wins.
MeteorResult meteor(const TokenSequence& hypothesis, std::span<const TokenSequence> references,
                    const MeteorOptions& options = {});
MeteorResult meteor(const EvalPair& pair, TokenizerMode mode = TokenizerMode::kDefault,
                    const MeteorOptions& options = {});

// ---------------------------------------------------------------- BERTScore

using EmbeddingMatrix = std::vector<std::vector<double>>;

/// Greedy cosine matching. Recall averages, over reference tokens, the best
/// cosine to any hypothesis token; precision is the mirror image. Optional
/// weights (one per token, empty span = uniform) turn both into weighted
/// means. Throws qgf::Error on a dimension mismatch or a weight count that
/// does not match its side. An empty side scores 0.
PRF bertscore(const EmbeddingMatrix& hypothesis, const EmbeddingMatrix& reference,
              std::span<const double> hypothesis_weights = {},
              std::span<const double> reference_weights = {});

}  // namespace qgf
