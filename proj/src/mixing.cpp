#include "qgf/mixing.hpp"

#include <filesystem>
#include <fstream>

#include "qgf/checksum.hpp"
#include "qgf/encoding.hpp"

namespace qgf {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::vector<std::string> read_example_lines(const MixInput& input) {
  std::ifstream in(input.path, std::ios::binary);
  if (!in) throw Error("cannot read mix input " + input.path);
  std::vector<std::string> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      parse_example(line);
    } catch (const Error& e) {
      throw Error("mix input " + input.path + " line " + std::to_string(line_no) + ": " +
                  e.what());
    }
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw Error("read error on mix input " + input.path);
  return lines;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Xoshiro256StarStar::Xoshiro256StarStar(std::uint64_t seed) {
  for (auto& word : s_) word = splitmix64(seed);
}

std::uint64_t Xoshiro256StarStar::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t Xoshiro256StarStar::below(std::uint64_t bound) {
  if (bound == 0) throw Error("below(0)");
  // (2^64 - bound) % bound == 2^64 % bound
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

std::vector<std::string> mix_lines(const std::vector<std::vector<std::string>>& inputs,
                                   std::uint64_t seed) {
  std::vector<std::string> all;
  for (const auto& lines : inputs) all.insert(all.end(), lines.begin(), lines.end());
  seeded_shuffle(all, seed);
  return all;
}

nlohmann::ordered_json summary_to_json(const MixSummary& s) {
  nlohmann::ordered_json j;
  j["strategy"] = "concat_shuffle";
  j["seed"] = s.seed;
  j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& c : s.per_input) {
    nlohmann::ordered_json e;
    e["dataset"] = c.input.dataset;
    e["split"] = to_string(c.input.split);
    e["path"] = c.input.path;
    e["count"] = c.count;
    j["inputs"].push_back(std::move(e));
  }
  j["total"] = s.total;
  j["expected_total"] = s.expected_total ? nlohmann::ordered_json(*s.expected_total)
                                         : nlohmann::ordered_json(nullptr);
  j["warnings"] = s.warnings;
  j["checksum"] = s.checksum;
  return j;
}

MixSummary mix(const MixPlan& plan, const std::string& output_path) {
  if (plan.inputs.empty()) throw Error("mix plan has no inputs");
  MixSummary summary;
  summary.seed = plan.seed;
  summary.expected_total = plan.expected_total;

  std::vector<std::vector<std::string>> loaded;
  loaded.reserve(plan.inputs.size());
  for (const auto& input : plan.inputs) {
    loaded.push_back(read_example_lines(input));
    summary.per_input.push_back({input, loaded.back().size()});
    summary.total += loaded.back().size();
  }
  if (plan.expected_total && *plan.expected_total != summary.total) {
    summary.warnings.push_back("expected " + std::to_string(*plan.expected_total) +
                               " examples, mixed " + std::to_string(summary.total));
  }

  const auto mixed = mix_lines(loaded, plan.seed);
  std::ofstream out(output_path, std::ios::binary);
  if (!out) throw Error("cannot write mixed corpus " + output_path);
  Sha256 hash;
  for (const auto& line : mixed) {
    out << line << '\n';
    hash.update(line);
    hash.update("\n");
  }
  out.flush();
  if (!out) throw Error("write failed for " + output_path);
  summary.checksum = hash.digest();
  return summary;
}

nlohmann::ordered_json training_manifest_to_json(const TrainingManifest& m) {
  nlohmann::ordered_json j;
  j["steps"] = m.steps;
  j["learning_rate"] = m.learning_rate;
  j["optimizer"] = m.optimizer;
  j["base_checkpoint"] = m.base_checkpoint;
  j["mixture_path"] = m.mixture_path;
  j["mixture_checksum"] = m.mixture_checksum;
  return j;
}

TrainingManifest emit_training_manifest(const TrainingConfig& config,
                                        const std::string& corpus_path,
                                        const std::string& manifest_path) {
  if (!std::filesystem::is_regular_file(corpus_path)) {
    throw Error("mixed corpus not found: " + corpus_path);
  }
  if (config.steps <= 0) throw Error("steps must be positive");
  if (!(config.learning_rate > 0.0)) throw Error("learning rate must be positive");
  if (config.optimizer.empty() || config.base_checkpoint.empty()) {
    throw Error("optimizer and base checkpoint must be named");
  }
  TrainingManifest m;
  m.steps = config.steps;
  m.learning_rate = config.learning_rate;
  m.optimizer = config.optimizer;
  m.base_checkpoint = config.base_checkpoint;
  m.mixture_path = corpus_path;
  m.mixture_checksum = sha256_file(corpus_path);

  std::ofstream out(manifest_path, std::ios::binary);
  if (!out) throw Error("cannot write training manifest " + manifest_path);
  out << training_manifest_to_json(m).dump(2) << '\n';
  return m;
}

}  // namespace qgf
