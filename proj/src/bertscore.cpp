#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qgf/metrics.hpp"

namespace qgf {

namespace {

std::vector<std::vector<double>> unit_rows(const EmbeddingMatrix& m) {
  std::vector<std::vector<double>> out;
  out.reserve(m.size());
  for (const auto& row : m) {
    double norm = 0.0;
    for (const double v : row) norm += v * v;
    norm = std::sqrt(norm);
    std::vector<double> unit(row.size(), 0.0);
    if (norm > 0.0) {
      for (std::size_t k = 0; k < row.size(); ++k) unit[k] = row[k] / norm;
    }
    out.push_back(std::move(unit));
  }
  return out;
}

std::size_t common_dimension(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  const std::size_t dim = a.front().size();
  for (const auto* m : {&a, &b}) {
    for (const auto& row : *m) {
      if (row.size() != dim) {
        throw Error("embedding dimension mismatch: " + std::to_string(row.size()) + " vs " +
                    std::to_string(dim));
      }
    }
  }
  return dim;
}

// Weighted mean over `from` rows of the best cosine against any `to` row.
double greedy_side(const std::vector<std::vector<double>>& from,
                   const std::vector<std::vector<double>>& to, std::span<const double> weights) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& other : to) {
      double dot = 0.0;
      for (std::size_t k = 0; k < other.size(); ++k) dot += from[i][k] * other[k];
      best = std::max(best, dot);
    }
    const double w = weights.empty() ? 1.0 : weights[i];
    num += w * best;
    den += w;
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

PRF bertscore(const EmbeddingMatrix& hypothesis, const EmbeddingMatrix& reference,
              std::span<const double> hypothesis_weights,
              std::span<const double> reference_weights) {
  if (!hypothesis_weights.empty() && hypothesis_weights.size() != hypothesis.size()) {
    throw Error("hypothesis weight count does not match its tokens");
  }
  if (!reference_weights.empty() && reference_weights.size() != reference.size()) {
    throw Error("reference weight count does not match its tokens");
  }
  PRF s;
  if (hypothesis.empty() || reference.empty()) return s;
  common_dimension(hypothesis, reference);
  const auto hyp = unit_rows(hypothesis);
  const auto ref = unit_rows(reference);
  s.precision = greedy_side(hyp, ref, hypothesis_weights);
  s.recall = greedy_side(ref, hyp, reference_weights);
  s.f1 = harmonic_f1(s.precision, s.recall);
  return s;
}

}  // namespace qgf
