#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qgf/corpus_model.hpp"

namespace qgf {

/// xoshiro256** 1.0 (Blackman & Vigna). State is seeded from a single 64-bit
/// value by four successive splitmix64 outputs. Output is identical on every
/// platform, unlike std:: distributions.
class Xoshiro256StarStar {
 public:
  explicit Xoshiro256StarStar(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform integer in [0, bound) by rejection: draws below 2^64 mod bound
  /// are discarded, then the draw is reduced modulo bound. bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Fisher-Yates, descending: for i = n-1 .. 1 swap(i, below(i + 1)).
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
  Xoshiro256StarStar rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

struct MixInput {
  std::string dataset;
  Split split = Split::kTrain;
  std::string path;
};

struct MixPlan {
  std::vector<MixInput> inputs;
  std::uint64_t seed = 0;
  std::optional<std::size_t> expected_total;
};

struct MixCount {
  MixInput input;
  std::size_t count = 0;
};

struct MixSummary {
  std::vector<MixCount> per_input;
  std::size_t total = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> expected_total;
  std::vector<std::string> warnings;
  std::string checksum;  // sha256 of the mixed corpus bytes
};

nlohmann::ordered_json summary_to_json(const MixSummary& summary);

/// Concatenates every input (each line must parse as an EncodedExample),
/// shuffles the line order with seeded_shuffle and writes the result. Lines
/// are copied byte-for-byte. Throws qgf::Error naming the file on an
/// unreadable or malformed input.
MixSummary mix(const MixPlan& plan, const std::string& output_path);

/// In-memory variant over already loaded lines, one vector per input.
std::vector<std::string> mix_lines(const std::vector<std::vector<std::string>>& inputs,
                                   std::uint64_t seed);

struct TrainingConfig {
  long long steps = 100000;
  double learning_rate = 3e-5;
  std::string optimizer = "adamw";
  std::string base_checkpoint = "t5-base";
};

struct TrainingManifest {
  long long steps = 0;
  double learning_rate = 0.0;
  std::string optimizer;
  std::string base_checkpoint;
  std::string mixture_path;
  std::string mixture_checksum;
};

nlohmann::ordered_json training_manifest_to_json(const TrainingManifest& manifest);

/// Metadata for an external trainer; nothing is executed. Throws qgf::Error
/// if the mixed corpus does not exist.
TrainingManifest emit_training_manifest(const TrainingConfig& config,
                                        const std::string& corpus_path,
                                        const std::string& manifest_path);

}  // namespace qgf
