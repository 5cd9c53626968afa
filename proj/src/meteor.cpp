#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <unordered_map>

#include "qgf/metrics.hpp"

namespace qgf {

namespace {

constexpr int kUnmatched = -1;

// Exhaustive (budgeted) search over stage-wise maximum alignments, keeping
// the one with the fewest chunks. Stage keys are exact tokens, then stems.
class AlignmentSearch {
 public:
  AlignmentSearch(std::vector<std::vector<std::string>> hyp_keys,
                  std::vector<std::vector<std::string>> ref_keys, std::size_t budget)
      : hyp_keys_(std::move(hyp_keys)), ref_keys_(std::move(ref_keys)), budget_(budget) {
    const std::size_t h = hyp_keys_.empty() ? 0 : hyp_keys_.front().size();
    const std::size_t r = ref_keys_.empty() ? 0 : ref_keys_.front().size();
    hyp_to_ref_.assign(h, kUnmatched);
    ref_used_.assign(r, false);
  }

  void run() { start_stage(0); }

  std::size_t best_matches() const { return best_matches_; }
  std::size_t best_chunks() const { return best_chunks_; }

 private:
  struct StageState {
    std::vector<std::size_t> positions;                  // hyp positions in play
    std::unordered_map<std::string, std::size_t> quota;  // max matches per key
    std::unordered_map<std::string, std::size_t> used;
    std::vector<std::size_t> needed_after;  // unmatched-in-play count per key after index
  };

  void start_stage(std::size_t stage) {
    if (stage == hyp_keys_.size()) {
      evaluate();
      return;
    }
    const auto& hk = hyp_keys_[stage];
    const auto& rk = ref_keys_[stage];
    std::unordered_map<std::string, std::size_t> hyp_avail;
    std::unordered_map<std::string, std::size_t> ref_avail;
    for (std::size_t i = 0; i < hk.size(); ++i) {
      if (hyp_to_ref_[i] == kUnmatched) ++hyp_avail[hk[i]];
    }
    for (std::size_t j = 0; j < rk.size(); ++j) {
      if (!ref_used_[j]) ++ref_avail[rk[j]];
    }
    auto state = std::make_unique<StageState>();
    for (std::size_t i = 0; i < hk.size(); ++i) {
      if (hyp_to_ref_[i] != kUnmatched) continue;
      auto it = ref_avail.find(hk[i]);
      if (it == ref_avail.end()) continue;
      state->positions.push_back(i);
      state->quota[hk[i]] = std::min(hyp_avail[hk[i]], it->second);
    }
    stages_.push_back(std::move(state));
    descend(stage, 0);
    stages_.pop_back();
  }

  std::size_t remaining_with_key(const StageState& st, std::size_t from,
                                 const std::string& key, std::size_t stage) const {
    std::size_t n = 0;
    for (std::size_t k = from; k < st.positions.size(); ++k) {
      if (hyp_keys_[stage][st.positions[k]] == key) ++n;
    }
    return n;
  }

  void descend(std::size_t stage, std::size_t index) {
    if (nodes_ >= budget_ && found_) return;
    ++nodes_;
    StageState& st = *stages_.back();
    if (index == st.positions.size()) {
      start_stage(stage + 1);
      return;
    }
    const std::size_t i = st.positions[index];
    const std::string& key = hyp_keys_[stage][i];
    const auto& rk = ref_keys_[stage];
    const std::size_t quota = st.quota[key];
    const std::size_t used = st.used[key];

    if (used < quota) {
      // Try the reference slot continuing the previous hypothesis match first.
      std::vector<std::size_t> order;
      std::size_t preferred = std::numeric_limits<std::size_t>::max();
      if (i > 0 && hyp_to_ref_[i - 1] != kUnmatched) {
        preferred = static_cast<std::size_t>(hyp_to_ref_[i - 1]) + 1;
      }
      if (preferred < rk.size() && !ref_used_[preferred] && rk[preferred] == key) {
        order.push_back(preferred);
      }
      for (std::size_t j = 0; j < rk.size(); ++j) {
        if (j != preferred && !ref_used_[j] && rk[j] == key) order.push_back(j);
      }
      for (const std::size_t j : order) {
        hyp_to_ref_[i] = static_cast<int>(j);
        ref_used_[j] = true;
        ++st.used[key];
        descend(stage, index + 1);
        --st.used[key];
        ref_used_[j] = false;
        hyp_to_ref_[i] = kUnmatched;
        if (nodes_ >= budget_ && found_) return;
      }
    }
    // Skipping is allowed only if later positions can still fill the quota.
    if (remaining_with_key(st, index + 1, key, stage) >= quota - used) {
      descend(stage, index + 1);
    }
  }

  void evaluate() {
    std::size_t matches = 0;
    std::size_t chunks = 0;
    int prev_i = -2;
    int prev_j = -2;
    for (std::size_t i = 0; i < hyp_to_ref_.size(); ++i) {
      const int j = hyp_to_ref_[i];
      if (j == kUnmatched) continue;
      ++matches;
      if (!(static_cast<int>(i) == prev_i + 1 && j == prev_j + 1)) ++chunks;
      prev_i = static_cast<int>(i);
      prev_j = j;
    }
    if (!found_ || matches > best_matches_ ||
        (matches == best_matches_ && chunks < best_chunks_)) {
      best_matches_ = matches;
      best_chunks_ = chunks;
    }
    found_ = true;
  }

  std::vector<std::vector<std::string>> hyp_keys_;
  std::vector<std::vector<std::string>> ref_keys_;
  std::size_t budget_;
  std::vector<int> hyp_to_ref_;
  std::vector<bool> ref_used_;
  std::vector<std::unique_ptr<StageState>> stages_;
  std::size_t nodes_ = 0;
  bool found_ = false;
  std::size_t best_matches_ = 0;
  std::size_t best_chunks_ = 0;
};

std::vector<std::string> stems(const TokenSequence& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(porter_stem(t));
  return out;
}

MeteorResult meteor_single(const TokenSequence& hyp, const TokenSequence& ref,
                           const MeteorOptions& options) {
  MeteorResult result;
  if (hyp.empty() || ref.empty()) return result;
  std::vector<std::vector<std::string>> hyp_keys{hyp};
  std::vector<std::vector<std::string>> ref_keys{ref};
  if (options.stem_stage) {
    hyp_keys.push_back(stems(hyp));
    ref_keys.push_back(stems(ref));
  }
  AlignmentSearch search(std::move(hyp_keys), std::move(ref_keys), options.search_budget);
  search.run();
  result.matches = search.best_matches();
  result.chunks = search.best_chunks();
  if (result.matches == 0) return result;
  const double m = static_cast<double>(result.matches);
  result.precision = m / static_cast<double>(hyp.size());
  result.recall = m / static_cast<double>(ref.size());
  result.fmean = 10.0 * result.precision * result.recall /
                 (result.recall + 9.0 * result.precision);
  result.penalty = 0.5 * std::pow(static_cast<double>(result.chunks) / m, 3.0);
  result.score = result.fmean * (1.0 - result.penalty);
  return result;
}

}  // namespace

MeteorResult meteor(const TokenSequence& hypothesis, std::span<const TokenSequence> references,
                    const MeteorOptions& options) {
  if (references.empty()) throw Error("evaluation pair has no references");
  MeteorResult best;
  bool first = true;
  for (const auto& ref : references) {
    MeteorResult r = meteor_single(hypothesis, ref, options);
    if (first || r.score > best.score) best = r;
    first = false;
  }
  return best;
}

MeteorResult meteor(const EvalPair& pair, TokenizerMode mode, const MeteorOptions& options) {
  const TokenizedPair t = tokenize_pair(pair, mode);
  return meteor(t.hypothesis, t.references, options);
}

}  // namespace qgf
