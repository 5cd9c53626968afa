#include "qgf/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

namespace qgf {

std::string_view column_name(Metric metric) {
  switch (metric) {
    case Metric::kBleu: return "BLEU";
    case Metric::kRouge1: return "R1";
    case Metric::kRouge2: return "R2";
    case Metric::kRougeL: return "RL";
    case Metric::kRougeLsum: return "RLsum";
    case Metric::kMeteor: return "METEOR";
    case Metric::kBertScore: return "BERTScore";
  }
  return "?";
}

Metric parse_metric(std::string_view text) {
  std::string lower;
  for (const char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  static const std::unordered_map<std::string, Metric> kNames = {
      {"bleu", Metric::kBleu},        {"r1", Metric::kRouge1},
      {"rouge1", Metric::kRouge1},    {"r2", Metric::kRouge2},
      {"rouge2", Metric::kRouge2},    {"rl", Metric::kRougeL},
      {"rougel", Metric::kRougeL},    {"rlsum", Metric::kRougeLsum},
      {"rougelsum", Metric::kRougeLsum}, {"meteor", Metric::kMeteor},
      {"bertscore", Metric::kBertScore}};
  auto it = kNames.find(lower);
  if (it == kNames.end()) throw Error("unknown metric '" + std::string(text) + "'");
  return it->second;
}

std::vector<Metric> parse_metric_list(std::string_view text) {
  std::set<Metric> chosen;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item == "all") {
      chosen.insert(kAllMetrics.begin(), kAllMetrics.end());
    } else if (!item.empty()) {
      chosen.insert(parse_metric(item));
    }
    start = end + 1;
  }
  if (chosen.empty()) throw Error("no metrics selected");
  // std::set orders by enum value, which is column order
  return {chosen.begin(), chosen.end()};
}

double table_value(Metric metric, double raw) {
  return metric == Metric::kBertScore ? raw : raw * 100.0;
}

namespace {

bool wants(const EvalConfig& config, Metric m) {
  return std::find(config.metrics.begin(), config.metrics.end(), m) != config.metrics.end();
}

void score_pair(const EvalPair& pair, const EvalConfig& config, PairScores& out) {
  out.id = pair.id;
  const TokenizedPair t = tokenize_pair(pair, config.tokenizer);
  if (wants(config, Metric::kBleu)) {
    out.scores[Metric::kBleu] = bleu(std::span<const TokenizedPair>(&t, 1), config.bleu).score;
  }
  if (wants(config, Metric::kRouge1)) out.scores[Metric::kRouge1] = rouge_n(t.hypothesis, t.references, 1).f1;
  if (wants(config, Metric::kRouge2)) out.scores[Metric::kRouge2] = rouge_n(t.hypothesis, t.references, 2).f1;
  if (wants(config, Metric::kRougeL)) out.scores[Metric::kRougeL] = rouge_l(t.hypothesis, t.references).f1;
  if (wants(config, Metric::kRougeLsum)) {
    out.scores[Metric::kRougeLsum] = rouge_lsum(pair, config.tokenizer, config.splitter).f1;
  }
  if (wants(config, Metric::kMeteor)) {
    out.scores[Metric::kMeteor] = meteor(t.hypothesis, t.references, config.meteor).score;
  }
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  for (unsigned w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

// Scores BERTScore for every pair; throws if the embedder fails.
std::vector<double> bertscore_column(const std::vector<EvalPair>& pairs, const EvalConfig& config,
                                     TokenEmbedder& embedder) {
  std::vector<std::string> texts;
  std::unordered_map<std::string, std::size_t> index;
  auto intern = [&](const std::string& s) {
    auto [it, inserted] = index.emplace(s, texts.size());
    if (inserted) texts.push_back(s);
    return it->second;
  };
  for (const auto& p : pairs) {
    intern(p.hypothesis);
    for (const auto& r : p.references) intern(r);
  }
  const std::vector<TokenEmbedding> embedded = embedder.embed(texts);
  if (embedded.size() != texts.size()) {
    throw Error("embedder returned " + std::to_string(embedded.size()) + " results for " +
                std::to_string(texts.size()) + " texts");
  }

  std::unordered_map<std::string, double> idf;
  if (config.bertscore_idf) {
    std::unordered_map<std::string, std::size_t> df;
    std::size_t documents = 0;
    for (const auto& p : pairs) {
      for (const auto& r : p.references) {
        ++documents;
        const auto& toks = embedded[index.at(r)].tokens;
        for (const auto& tok : std::set<std::string>(toks.begin(), toks.end())) ++df[tok];
      }
    }
    for (const auto& [tok, n] : df) {
      idf[tok] = std::log((static_cast<double>(documents) + 1.0) / (static_cast<double>(n) + 1.0));
    }
    idf[""] = std::log(static_cast<double>(documents) + 1.0);  // unseen tokens
  }
  auto weights = [&](const TokenEmbedding& e) {
    std::vector<double> w;
    if (!config.bertscore_idf) return w;
    for (const auto& tok : e.tokens) {
      auto it = idf.find(tok);
      w.push_back(it != idf.end() ? it->second : idf.at(""));
    }
    return w;
  };

  std::vector<double> scores(pairs.size(), 0.0);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const TokenEmbedding& hyp = embedded[index.at(pairs[i].hypothesis)];
    const auto hw = weights(hyp);
    double best = 0.0;
    bool first = true;
    for (const auto& r : pairs[i].references) {
      const TokenEmbedding& ref = embedded[index.at(r)];
      const auto rw = weights(ref);
      const double f1 = bertscore(hyp.vectors, ref.vectors, hw, rw).f1;
      if (first || f1 > best) best = f1;
      first = false;
    }
    scores[i] = best;
  }
  return scores;
}

}  // namespace

MetricReport evaluate_corpus(const std::vector<EvalPair>& pairs, const EvalConfig& config,
                             TokenEmbedder* embedder) {
  if (pairs.empty()) throw Error("evaluation needs at least one pair");
  for (const auto& p : pairs) {
    if (p.references.empty()) throw Error("pair '" + p.id + "' has no references");
  }
  MetricReport report;
  for (const Metric m : kAllMetrics) {
    if (wants(config, m)) report.metrics.push_back(m);
  }
  report.pair_count = pairs.size();
  report.pairs.resize(pairs.size());
  parallel_for(pairs.size(), config.threads,
               [&](std::size_t i) { score_pair(pairs[i], config, report.pairs[i]); });

  if (wants(config, Metric::kBertScore)) {
    if (embedder == nullptr) {
      report.unavailable[Metric::kBertScore] = "no embedding endpoint configured";
    } else {
      try {
        const auto column = bertscore_column(pairs, config, *embedder);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
          report.pairs[i].scores[Metric::kBertScore] = column[i];
        }
      } catch (const Error& e) {
        report.unavailable[Metric::kBertScore] = e.what();
        for (auto& p : report.pairs) p.scores.erase(Metric::kBertScore);
      }
    }
    if (report.unavailable.count(Metric::kBertScore)) {
      report.warnings.push_back("BERTScore unavailable: " + report.unavailable[Metric::kBertScore]);
    }
  }

  for (const Metric m : report.metrics) {
    if (report.unavailable.count(m)) continue;
    if (m == Metric::kBleu) {
      std::vector<TokenizedPair> tokenized;
      tokenized.reserve(pairs.size());
      for (const auto& p : pairs) tokenized.push_back(tokenize_pair(p, config.tokenizer));
      BleuResult b = bleu(std::span<const TokenizedPair>(tokenized), config.bleu);
      report.corpus[m] = b.score;
      for (auto& w : b.warnings) report.warnings.push_back(std::move(w));
      continue;
    }
    double sum = 0.0;
    for (const auto& p : report.pairs) sum += p.scores.at(m);
    report.corpus[m] = sum / static_cast<double>(pairs.size());
  }
  return report;
}

nlohmann::ordered_json report_to_json(const MetricReport& report, const EvalConfig& config) {
  using nlohmann::ordered_json;
  ordered_json cfg;
  ordered_json cols = ordered_json::array();
  for (const Metric m : report.metrics) cols.push_back(column_name(m));
  cfg["metrics"] = cols;
  cfg["tokenizer"] = to_string(config.tokenizer);
  cfg["bleu_max_n"] = config.bleu.max_n;
  cfg["bleu_smooth"] = config.bleu.smooth;
  cfg["meteor_stem_stage"] = config.meteor.stem_stage;
  cfg["bertscore_idf"] = config.bertscore_idf;

  ordered_json j;
  j["config"] = cfg;
  j["pair_count"] = report.pair_count;
  ordered_json corpus = ordered_json::object();
  ordered_json table = ordered_json::object();
  for (const Metric m : report.metrics) {
    const std::string name(column_name(m));
    if (report.available(m)) {
      corpus[name] = report.corpus.at(m);
      table[name] = table_value(m, report.corpus.at(m));
    } else {
      corpus[name] = nullptr;
      table[name] = nullptr;
    }
  }
  j["corpus"] = corpus;
  j["table"] = table;
  ordered_json unavailable = ordered_json::object();
  for (const auto& [m, reason] : report.unavailable) unavailable[std::string(column_name(m))] = reason;
  j["unavailable"] = unavailable;
  j["warnings"] = report.warnings;
  ordered_json pairs = ordered_json::array();
  for (const auto& p : report.pairs) {
    ordered_json row;
    row["id"] = p.id;
    for (const Metric m : report.metrics) {
      auto it = p.scores.find(m);
      if (it != p.scores.end()) row[std::string(column_name(m))] = it->second;
    }
    pairs.push_back(std::move(row));
  }
  j["pairs"] = pairs;
  return j;
}

std::string csv_header(const std::vector<Metric>& metrics) {
  std::string out;
  for (const Metric m : metrics) {
    if (!out.empty()) out.push_back(',');
    out += column_name(m);
  }
  return out;
}

std::string csv_row(const MetricReport& report) {
  std::string out;
  for (const Metric m : report.metrics) {
    if (!out.empty()) out.push_back(',');
    if (!report.available(m)) {
      out += "NA";
      continue;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, m == Metric::kBertScore ? "%.4f" : "%.2f",
                  table_value(m, report.corpus.at(m)));
    out += buf;
  }
  return out;
}

namespace {

template <typename Fn>
void for_each_json_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      fn(j);
    } catch (const nlohmann::json::exception& e) {
      throw Error(path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

}  // namespace

std::vector<Prediction> read_predictions(const std::string& path) {
  std::vector<Prediction> out;
  for_each_json_line(path, [&](const nlohmann::json& j) {
    out.push_back({j.at("id").get<std::string>(), j.at("hypothesis").get<std::string>()});
  });
  return out;
}

std::map<std::string, std::vector<std::string>> read_references(const std::string& path) {
  std::map<std::string, std::vector<std::string>> out;
  for_each_json_line(path, [&](const nlohmann::json& j) {
    auto id = j.at("id").get<std::string>();
    auto refs = j.at("references").get<std::vector<std::string>>();
    if (refs.empty()) throw Error(path + ": id '" + id + "' has no references");
    if (!out.emplace(id, std::move(refs)).second) {
      throw Error(path + ": duplicate id '" + id + "'");
    }
  });
  return out;
}

std::vector<EvalPair> join_predictions(const std::vector<Prediction>& predictions,
                                       const std::map<std::string, std::vector<std::string>>& refs,
                                       std::vector<std::string>* warnings) {
  std::vector<EvalPair> pairs;
  std::set<std::string> seen;
  for (const auto& p : predictions) {
    if (!seen.insert(p.id).second) throw Error("duplicate prediction id '" + p.id + "'");
    auto it = refs.find(p.id);
    if (it == refs.end()) throw Error("prediction '" + p.id + "' has no references");
    pairs.push_back({p.id, p.hypothesis, it->second});
  }
  if (warnings != nullptr) {
    std::size_t unmatched = 0;
    for (const auto& [id, r] : refs) unmatched += seen.count(id) ? 0 : 1;
    if (unmatched > 0) {
      warnings->push_back(std::to_string(unmatched) + " reference ids have no prediction");
    }
  }
  return pairs;
}

}  // namespace qgf
