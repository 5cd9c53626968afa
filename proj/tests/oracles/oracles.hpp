#pragma once

// Deliberately naive reference implementations used to check the metric
// code. Nothing here shares code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

struct Gram {
  Tokens words;
  std::size_t count = 0;
};

inline bool same_window(const Tokens& a, std::size_t i, const Tokens& b, std::size_t j,
                        std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    if (a[i + k] != b[j + k]) return false;
  }
  return true;
}

// Distinct n-grams with multiplicities, found by comparing every window
// against every other window.
inline std::vector<Gram> grams(const Tokens& t, std::size_t n) {
  std::vector<Gram> out;
  if (n == 0 || t.size() < n) return out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) {
    bool seen = false;
    for (std::size_t p = 0; p < i; ++p) seen = seen || same_window(t, p, t, i, n);
    if (seen) continue;
    Gram g;
    g.words.assign(t.begin() + static_cast<long>(i), t.begin() + static_cast<long>(i + n));
    for (std::size_t j = 0; j + n <= t.size(); ++j) g.count += same_window(t, i, t, j, n) ? 1 : 0;
    out.push_back(std::move(g));
  }
  return out;
}

inline std::size_t count_in(const std::vector<Gram>& gs, const Tokens& words) {
  for (const auto& g : gs) {
    if (g.words == words) return g.count;
  }
  return 0;
}

inline std::size_t window_count(const Tokens& t, std::size_t n) {
  return t.size() >= n ? t.size() - n + 1 : 0;
}

inline double f1(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

struct Prf {
  double p = 0, r = 0, f = 0;
};

inline Prf rouge_n(const Tokens& hyp, const std::vector<Tokens>& refs, std::size_t n) {
  Prf best;
  bool first = true;
  const auto hg = grams(hyp, n);
  for (const auto& ref : refs) {
    const auto rg = grams(ref, n);
    std::size_t overlap = 0;
    for (const auto& g : hg) overlap += std::min(g.count, count_in(rg, g.words));
    const std::size_t hn = window_count(hyp, n);
    const std::size_t rn = window_count(ref, n);
    Prf s;
    s.p = hn ? static_cast<double>(overlap) / static_cast<double>(hn) : 0.0;
    s.r = rn ? static_cast<double>(overlap) / static_cast<double>(rn) : 0.0;
    s.f = f1(s.p, s.r);
    if (first || s.f > best.f) best = s;
    first = false;
  }
  return best;
}

inline bool is_subsequence(const Tokens& small, const Tokens& big) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < big.size() && j < small.size(); ++i) {
    if (big[i] == small[j]) ++j;
  }
  return j == small.size();
}

// Enumerates every subsequence of the shorter side (2^n of them).
inline std::size_t lcs(const Tokens& a, const Tokens& b) {
  const Tokens& s = a.size() <= b.size() ? a : b;
  const Tokens& l = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  for (unsigned long mask = 0; mask < (1ul << s.size()); ++mask) {
    Tokens pick;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (mask & (1ul << k)) pick.push_back(s[k]);
    }
    if (pick.size() > best && is_subsequence(pick, l)) best = pick.size();
  }
  return best;
}

inline Prf rouge_l(const Tokens& hyp, const std::vector<Tokens>& refs) {
  Prf best;
  bool first = true;
  for (const auto& ref : refs) {
    const double m = static_cast<double>(lcs(hyp, ref));
    Prf s;
    s.p = hyp.empty() ? 0.0 : m / static_cast<double>(hyp.size());
    s.r = ref.empty() ? 0.0 : m / static_cast<double>(ref.size());
    s.f = f1(s.p, s.r);
    if (first || s.f > best.f) best = s;
    first = false;
  }
  return best;
}

struct BleuPair {
  Tokens hyp;
  std::vector<Tokens> refs;
};

// Corpus BLEU straight from the definition, no smoothing.
inline double bleu(const std::vector<BleuPair>& pairs, std::size_t max_n = 4) {
  std::vector<double> match(max_n + 1, 0.0);
  std::vector<double> total(max_n + 1, 0.0);
  double c = 0;
  double r = 0;
  for (const auto& pr : pairs) {
    c += static_cast<double>(pr.hyp.size());
    std::size_t best_len = pr.refs[0].size();
    for (const auto& ref : pr.refs) {
      const auto d = [&](std::size_t x) {
        return x > pr.hyp.size() ? x - pr.hyp.size() : pr.hyp.size() - x;
      };
      if (d(ref.size()) < d(best_len) || (d(ref.size()) == d(best_len) && ref.size() < best_len)) {
        best_len = ref.size();
      }
    }
    r += static_cast<double>(best_len);
    for (std::size_t n = 1; n <= max_n; ++n) {
      for (const auto& g : grams(pr.hyp, n)) {
        std::size_t cap = 0;
        for (const auto& ref : pr.refs) cap = std::max(cap, count_in(grams(ref, n), g.words));
        match[n] += static_cast<double>(std::min(g.count, cap));
      }
      total[n] += static_cast<double>(window_count(pr.hyp, n));
    }
  }
  if (c == 0) return 0.0;
  double log_sum = 0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    if (match[n] == 0 || total[n] == 0) return 0.0;
    log_sum += std::log(match[n] / total[n]);
  }
  const double bp = c > r ? 1.0 : std::exp(1 - r / c);
  return bp * std::exp(log_sum / static_cast<double>(max_n));
}

// METEOR from its counts.
inline double meteor_formula(double m, double chunks, double hyp_len, double ref_len) {
  if (m == 0) return 0.0;
  const double p = m / hyp_len;
  const double r = m / ref_len;
  const double fmean = 10 * p * r / (r + 9 * p);
  return fmean * (1 - 0.5 * std::pow(chunks / m, 3));
}

// Under one-hot token vectors a token's best cosine is 1 if its type occurs
// on the other side and 0 otherwise.
inline Prf overlap(const Tokens& hyp, const Tokens& ref) {
  Prf s;
  if (hyp.empty() || ref.empty()) return s;
  double hp = 0;
  for (const auto& t : hyp) hp += std::count(ref.begin(), ref.end(), t) ? 1 : 0;
  double rr = 0;
  for (const auto& t : ref) rr += std::count(hyp.begin(), hyp.end(), t) ? 1 : 0;
  s.p = hp / static_cast<double>(hyp.size());
  s.r = rr / static_cast<double>(ref.size());
  s.f = f1(s.p, s.r);
  return s;
}

}  // namespace oracle
