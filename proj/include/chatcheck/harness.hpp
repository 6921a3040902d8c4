#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "chatcheck/common.hpp"
#include "chatcheck/complexity.hpp"
#include "chatcheck/corpus.hpp"

namespace chatcheck::harness {

using corpus::Dataset;
using corpus::PredictionRecord;
using cx::ClassStats;

// Deterministic nearest-centroid classifier over the Mahalanobis metric,
// with a softmax confidence over negated distances. Stands in for an
// external NLU service so the whole pipeline runs self-contained.
struct ReferenceClassifier {
  ClassStats stats;
  double temperature = 1.0;
};

struct Classification {
  std::string intent;
  double confidence = 0.0;
};

inline Classification classify(std::span<const double> x, const ReferenceClassifier& clf) {
  if (clf.stats.intents.empty()) throw DataError("classifier has no fitted class stats");
  if (!(clf.temperature > 0.0) || !std::isfinite(clf.temperature))
    throw ConfigError("temperature must be finite and positive");
  const std::size_t k = clf.stats.intents.size();
  std::vector<double> dist(k);
  for (std::size_t i = 0; i < k; ++i)
    dist[i] = cx::detail::distance_to(x, clf.stats.centroids[i], clf.stats);
  // Intents are sorted, so first strict minimum = name-order tie-break.
  std::size_t best = 0;
  for (std::size_t i = 1; i < k; ++i)
    if (dist[i] < dist[best]) best = i;
  double maxscore = -dist[0] / clf.temperature;
  for (std::size_t i = 1; i < k; ++i) maxscore = std::max(maxscore, -dist[i] / clf.temperature);
  double denom = 0.0, num = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double w = std::exp(-dist[i] / clf.temperature - maxscore);
    denom += w;
    if (i == best) num = w;
  }
  return Classification{clf.stats.intents[best], num / denom};
}

inline std::vector<PredictionRecord> classify_dataset(const Dataset& ds,
                                                      const ReferenceClassifier& clf) {
  if (!ds.embedded()) throw DataError("classify_dataset requires an embedded dataset");
  std::vector<PredictionRecord> out;
  out.reserve(ds.size());
  for (const auto& ex : ds.examples) {
    const auto c = classify(*ex.embedding, clf);
    PredictionRecord rec;
    rec.example_id = ex.id;
    rec.gold = ex.intent;
    rec.predicted = c.intent;
    rec.confidence = c.confidence;
    rec.correct = rec.gold == rec.predicted;
    out.push_back(std::move(rec));
  }
  return out;
}

// Deterministic fallback embedder: hashed bag of character trigrams of the
// ASCII-lowercased text, each trigram contributing +/-1 at (hash >> 1) % dim
// with the sign taken from the hash's low bit, then L2-normalized. FNV-1a
// with pinned constants keeps vectors identical across runs and platforms.
inline std::vector<double> fallback_embed(std::string_view text, std::size_t dim = 64) {
  if (trim(text).empty()) throw DataError("empty text");
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
  std::string s = lower_ascii(text);
  while (s.size() < 3) s += ' ';
  std::vector<double> v(dim, 0.0);
  for (std::size_t i = 0; i + 3 <= s.size(); ++i) {
    const std::uint64_t h = fnv1a(std::string_view(s).substr(i, 3));
    const std::size_t idx = static_cast<std::size_t>((h >> 1) % dim);
    v[idx] += (h & 1u) ? 1.0 : -1.0;
  }
  double norm = 0.0;
  for (double c : v) norm += c * c;
  norm = std::sqrt(norm);
  if (norm < 1e-12) {
    v.assign(dim, 0.0);
    v[0] = 1.0;
    return v;
  }
  for (double& c : v) c /= norm;
  return v;
}

inline Dataset fallback_embed_dataset(const Dataset& ds, std::size_t dim = 64) {
  std::vector<corpus::LabeledExample> rows = ds.examples;
  for (auto& ex : rows) ex.embedding = fallback_embed(ex.text, dim);
  return Dataset::from_examples(std::move(rows));
}

}  // namespace chatcheck::harness
