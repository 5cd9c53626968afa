#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qgf/metrics.hpp"

namespace qgf {

enum class Metric { kBleu, kRouge1, kRouge2, kRougeL, kRougeLsum, kMeteor, kBertScore };

/// Report column order.
inline constexpr std::array<Metric, 7> kAllMetrics = {
    Metric::kBleu,      Metric::kRouge1, Metric::kRouge2,   Metric::kRougeL,
    Metric::kRougeLsum, Metric::kMeteor, Metric::kBertScore};

/// "BLEU", "R1", "R2", "RL", "RLsum", "METEOR", "BERTScore".
std::string_view column_name(Metric metric);
/// Column names, case-insensitive; also rouge1/rouge2/rougeL/rougeLsum.
Metric parse_metric(std::string_view text);
std::vector<Metric> parse_metric_list(std::string_view comma_separated);

struct TokenEmbedding {
  std::vector<std::string> tokens;
  EmbeddingMatrix vectors;  // one row per token
};

/// Source of contextual token embeddings, e.g. the /embed client.
class TokenEmbedder {
 public:
  virtual ~TokenEmbedder() = default;
  /// One entry per input text, in order. Throws qgf::Error on failure.
  virtual std::vector<TokenEmbedding> embed(const std::vector<std::string>& texts) = 0;
};

struct EvalConfig {
  std::vector<Metric> metrics{kAllMetrics.begin(), kAllMetrics.end()};
  TokenizerMode tokenizer = TokenizerMode::kDefault;
  BleuOptions bleu;
  MeteorOptions meteor;
  SentenceSplitter splitter;
  // Weight BERTScore tokens by idf over the reference corpus.
  bool bertscore_idf = false;
  // Worker threads for per-pair scoring; 0 picks the hardware count.
  unsigned threads = 1;
};

struct PairScores {
  std::string id;
  std::map<Metric, double> scores;  // raw, in [0, 1]
};

struct MetricReport {
  std::vector<Metric> metrics;               // requested, in column order
  std::size_t pair_count = 0;
  std::map<Metric, double> corpus;           // raw aggregates
  std::map<Metric, std::string> unavailable; // column -> reason
  std::vector<PairScores> pairs;
  std::vector<std::string> warnings;

  bool available(Metric m) const { return corpus.count(m) != 0; }
};

/// Aggregates are means of per-pair scores, except BLEU which is scored on
/// the pooled corpus. A BERTScore failure (no embedder, or the embedder
/// throws) marks that column unavailable instead of aborting.
MetricReport evaluate_corpus(const std::vector<EvalPair>& pairs, const EvalConfig& config,
                             TokenEmbedder* embedder = nullptr);

/// Table scale: x100 for every column except BERTScore.
double table_value(Metric metric, double raw);

nlohmann::ordered_json report_to_json(const MetricReport& report, const EvalConfig& config);
std::string csv_header(const std::vector<Metric>& metrics);
/// Two decimals (four for BERTScore) on the table scale; "NA" if unavailable.
std::string csv_row(const MetricReport& report);

struct Prediction {
  std::string id;
  std::string hypothesis;
};

std::vector<Prediction> read_predictions(const std::string& path);
/// id -> references
std::map<std::string, std::vector<std::string>> read_references(const std::string& path);

/// Pairs in prediction order. Throws qgf::Error on a prediction without
/// references; references without a prediction are reported in `warnings`.
std::vector<EvalPair> join_predictions(const std::vector<Prediction>& predictions,
                                       const std::map<std::string, std::vector<std::string>>& refs,
                                       std::vector<std::string>* warnings = nullptr);

}  // namespace qgf
