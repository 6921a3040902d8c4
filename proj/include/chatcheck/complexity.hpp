#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "chatcheck/common.hpp"
#include "chatcheck/corpus.hpp"

namespace chatcheck::cx {

using corpus::Dataset;

// Per-intent centroids plus one pooled, ridge-regularized diagonal
// covariance, fitted on training embeddings only. Immutable once fitted.
struct ClassStats {
  std::vector<std::string> intents;              // sorted
  std::vector<std::vector<double>> centroids;    // parallel to intents
  std::vector<std::int64_t> counts;              // parallel to intents
  std::vector<double> sigma_diag;                // pooled variance + ridge, per dimension
  double ridge = 1e-3;
  std::size_t dim = 0;

  int index_of(std::string_view intent) const {
    auto it = std::lower_bound(intents.begin(), intents.end(), intent);
    if (it == intents.end() || *it != intent) return -1;
    return static_cast<int>(it - intents.begin());
  }
};

inline ClassStats fit_class_stats(const Dataset& train, double ridge = 1e-3) {
  if (ridge <= 0.0) throw ConfigError("ridge must be positive");
  if (!train.embedded()) throw DataError("fit_class_stats requires an embedded dataset");
  ClassStats stats;
  stats.ridge = ridge;
  stats.dim = *train.embedding_dim;
  if (stats.dim == 0) throw DataError("zero-dimensional embeddings");
  for (const auto& [intent, indices] : train.intent_index) {
    if (indices.size() < 2)
      throw DataError("intent '" + intent + "' has fewer than 2 examples");
    std::vector<double> centroid(stats.dim, 0.0);
    for (std::size_t i : indices) {
      const auto& e = *train.examples[i].embedding;
      for (std::size_t d = 0; d < stats.dim; ++d) centroid[d] += e[d];
    }
    for (double& c : centroid) c /= static_cast<double>(indices.size());
    stats.intents.push_back(intent);
    stats.centroids.push_back(std::move(centroid));
    stats.counts.push_back(static_cast<std::int64_t>(indices.size()));
  }
  // Pooled within-class variance over all train examples (population
  // convention: divide by N), ridge added elementwise.
  stats.sigma_diag.assign(stats.dim, 0.0);
  for (const auto& ex : train.examples) {
    const int idx = stats.index_of(ex.intent);
    const auto& mu = stats.centroids[static_cast<std::size_t>(idx)];
    const auto& e = *ex.embedding;
    for (std::size_t d = 0; d < stats.dim; ++d) {
      const double dev = e[d] - mu[d];
      stats.sigma_diag[d] += dev * dev;
    }
  }
  for (double& v : stats.sigma_diag) v = v / static_cast<double>(train.size()) + ridge;
  return stats;
}

namespace detail {

inline double distance_to(std::span<const double> x, const std::vector<double>& centroid,
                          const ClassStats& stats) {
  double sum = 0.0;
  for (std::size_t d = 0; d < stats.dim; ++d) {
    const double dev = x[d] - centroid[d];
    sum += dev * dev / stats.sigma_diag[d];
  }
  return std::sqrt(sum);
}

}  // namespace detail

inline double mahalanobis(std::span<const double> x, std::string_view intent,
                          const ClassStats& stats) {
  if (x.size() != stats.dim)
    throw DataError("vector dimension " + std::to_string(x.size()) + " does not match stats dimension " +
                    std::to_string(stats.dim));
  const int idx = stats.index_of(intent);
  if (idx < 0) throw DataError("unknown intent '" + std::string(intent) + "'");
  return detail::distance_to(x, stats.centroids[static_cast<std::size_t>(idx)], stats);
}

struct ComplexityOptions {
  double zero_denominator_cap = 100.0;
};

struct ComplexityDetail {
  double h = 0.0;
  double own_distance = 0.0;
  double nearest_other_distance = 0.0;
  std::string nearest_other;
};

// h(x, y) = d(x, mu_y) / min_{y' != y} d(x, mu_y'). Values below 1 mean the
// utterance sits closer to its own class than to any other.
inline ComplexityDetail utterance_complexity_detail(std::span<const double> x,
                                                    std::string_view gold, const ClassStats& stats,
                                                    const ComplexityOptions& opt = {}) {
  if (stats.intents.size() < 2)
    throw DataError("complexity needs at least 2 intents in the class stats");
  const int own = stats.index_of(gold);
  if (own < 0) throw DataError("unknown intent '" + std::string(gold) + "'");
  if (x.size() != stats.dim) throw DataError("vector dimension does not match stats dimension");
  ComplexityDetail out;
  out.own_distance = detail::distance_to(x, stats.centroids[static_cast<std::size_t>(own)], stats);
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0;
  for (std::size_t i = 0; i < stats.intents.size(); ++i) {
    if (static_cast<int>(i) == own) continue;
    const double d = detail::distance_to(x, stats.centroids[i], stats);
    if (d < best) {
      best = d;
      best_idx = i;
    }
  }
  out.nearest_other_distance = best;
  out.nearest_other = stats.intents[best_idx];
  out.h = best == 0.0 ? opt.zero_denominator_cap : out.own_distance / best;
  return out;
}

inline double utterance_complexity(std::span<const double> x, std::string_view gold,
                                   const ClassStats& stats, const ComplexityOptions& opt = {}) {
  return utterance_complexity_detail(x, gold, stats, opt).h;
}

// ---------------------------------------------------------------------------
// Pairwise intent confusion: C[A][B] is the fraction of A's examples at
// least as close to B's centroid as to A's own. Ties count as confused, which
// pins the diagonal to exactly 1.

struct ConfusionHeatmap {
  std::vector<std::string> intents;
  std::vector<std::vector<double>> matrix;

  double at(std::size_t a, std::size_t b) const { return matrix[a][b]; }
};

inline ConfusionHeatmap confusion_matrix(const Dataset& train, const ClassStats& stats) {
  if (!train.embedded()) throw DataError("confusion_matrix requires an embedded dataset");
  ConfusionHeatmap hm;
  hm.intents = stats.intents;
  const std::size_t k = hm.intents.size();
  hm.matrix.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t a = 0; a < k; ++a) {
    auto it = train.intent_index.find(hm.intents[a]);
    if (it == train.intent_index.end() || it->second.empty())
      throw DataError("intent '" + hm.intents[a] + "' has no examples in the dataset");
    const auto& indices = it->second;
    for (std::size_t b = 0; b < k; ++b) {
      std::int64_t confused = 0;
      for (std::size_t i : indices) {
        const auto& x = *train.examples[i].embedding;
        const double da = detail::distance_to(x, stats.centroids[a], stats);
        const double db = detail::distance_to(x, stats.centroids[b], stats);
        if (db <= da) ++confused;
      }
      hm.matrix[a][b] = static_cast<double>(confused) / static_cast<double>(indices.size());
    }
  }
  return hm;
}

// ---------------------------------------------------------------------------
// 2-D projection onto the top two principal components. The eigenproblem is
// solved with cyclic Jacobi rotations; the sign of each axis is fixed by
// making its largest-magnitude loading positive.

namespace detail {

inline void jacobi_symmetric_eigen(std::vector<double>& a, std::size_t n,
                                   std::vector<double>& eigvec) {
  eigvec.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) eigvec[i * n + i] = 1.0;
  double frob = 0.0;
  for (double v : a) frob += v * v;
  const double stop = 1e-26 * (frob + 1.0);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (off < stop) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        double t;
        if (std::fabs(theta) > 1e150) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double app = a[p * n + p], aqq = a[q * n + q];
        a[p * n + p] = app - t * apq;
        a[q * n + q] = aqq + t * apq;
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double aip = a[i * n + p] /* == a[p*n+i] */;
          const double aiq = a[i * n + q];
          a[i * n + p] = aip - s * (aiq + tau * aip);
          a[p * n + i] = a[i * n + p];
          a[i * n + q] = aiq + s * (aip - tau * aiq);
          a[q * n + i] = a[i * n + q];
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = eigvec[i * n + p];
          const double viq = eigvec[i * n + q];
          eigvec[i * n + p] = vip - s * (viq + tau * vip);
          eigvec[i * n + q] = viq + s * (vip - tau * viq);
        }
      }
    }
  }
}

}  // namespace detail

inline std::vector<std::array<double, 2>> project_2d(
    const std::vector<std::vector<double>>& points) {
  if (points.size() < 2) throw DataError("project_2d needs at least 2 points");
  const std::size_t dim = points[0].size();
  if (dim < 2) throw DataError("project_2d needs dimension >= 2");
  for (const auto& p : points)
    if (p.size() != dim) throw DataError("project_2d: inconsistent dimensions");
  std::vector<double> mean(dim, 0.0);
  for (const auto& p : points)
    for (std::size_t d = 0; d < dim; ++d) mean[d] += p[d];
  for (double& m : mean) m /= static_cast<double>(points.size());
  double spread = 0.0;
  std::vector<double> cov(dim * dim, 0.0);
  for (const auto& p : points) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double di = p[i] - mean[i];
      spread += di * di;
      for (std::size_t j = i; j < dim; ++j) {
        cov[i * dim + j] += di * (p[j] - mean[j]);
      }
    }
  }
  if (spread == 0.0) throw DataError("project_2d: all points identical");
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i; j < dim; ++j) {
      cov[i * dim + j] /= static_cast<double>(points.size());
      cov[j * dim + i] = cov[i * dim + j];
    }
  std::vector<double> eigvec;
  detail::jacobi_symmetric_eigen(cov, dim, eigvec);
  // Top-2 eigenvalues (now on the diagonal), deterministic tie-break by index.
  std::vector<std::size_t> order(dim);
  for (std::size_t i = 0; i < dim; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return cov[x * dim + x] > cov[y * dim + y];
  });
  std::array<std::vector<double>, 2> axes;
  for (int k = 0; k < 2; ++k) {
    axes[static_cast<std::size_t>(k)].resize(dim);
    const std::size_t col = order[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < dim; ++i)
      axes[static_cast<std::size_t>(k)][i] = eigvec[i * dim + col];
    // Sign convention: largest-magnitude loading is positive.
    std::size_t arg = 0;
    for (std::size_t i = 1; i < dim; ++i)
      if (std::fabs(axes[static_cast<std::size_t>(k)][i]) >
          std::fabs(axes[static_cast<std::size_t>(k)][arg]))
        arg = i;
    if (axes[static_cast<std::size_t>(k)][arg] < 0.0)
      for (double& v : axes[static_cast<std::size_t>(k)]) v = -v;
  }
  std::vector<std::array<double, 2>> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    std::array<double, 2> xy{0.0, 0.0};
    for (std::size_t d = 0; d < dim; ++d) {
      const double c = p[d] - mean[d];
      xy[0] += c * axes[0][d];
      xy[1] += c * axes[1][d];
    }
    out.push_back(xy);
  }
  return out;
}

// ---------------------------------------------------------------------------
// jsonl persistence: one meta row carrying the pooled covariance, then one
// row per intent.

inline void save_class_stats(const ClassStats& stats, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file '" + path + "'");
  nlohmann::json metarow;
  metarow["type"] = "covariance";
  metarow["dim"] = stats.dim;
  metarow["ridge"] = stats.ridge;
  metarow["sigma_diag"] = stats.sigma_diag;
  out << metarow.dump() << '\n';
  for (std::size_t i = 0; i < stats.intents.size(); ++i) {
    nlohmann::json row;
    row["type"] = "class";
    row["intent"] = stats.intents[i];
    row["centroid"] = stats.centroids[i];
    row["count"] = stats.counts[i];
    out << row.dump() << '\n';
  }
}

inline ClassStats load_class_stats(const std::string& path) {
  const auto lines = corpus::detail::read_lines(path);
  ClassStats stats;
  bool have_meta = false;
  std::size_t row = 0;
  for (const auto& line : lines) {
    ++row;
    if (trim(line).empty()) continue;
    auto obj = corpus::detail::parse_json_line(line, path, row);
    const std::string type = obj.value("type", std::string());
    if (type == "covariance") {
      stats.dim = obj.at("dim").get<std::size_t>();
      stats.ridge = obj.at("ridge").get<double>();
      stats.sigma_diag = obj.at("sigma_diag").get<std::vector<double>>();
      have_meta = true;
    } else if (type == "class") {
      stats.intents.push_back(obj.at("intent").get<std::string>());
      stats.centroids.push_back(obj.at("centroid").get<std::vector<double>>());
      stats.counts.push_back(obj.at("count").get<std::int64_t>());
    } else {
      throw DataError(path + " row " + std::to_string(row) + ": unknown row type");
    }
  }
  if (!have_meta || stats.intents.empty())
    throw DataError(path + ": incomplete class stats file");
  // Rows may arrive in any order; restore the sorted-intent invariant.
  std::vector<std::size_t> order(stats.intents.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return stats.intents[a] < stats.intents[b]; });
  ClassStats sorted;
  sorted.dim = stats.dim;
  sorted.ridge = stats.ridge;
  sorted.sigma_diag = std::move(stats.sigma_diag);
  for (std::size_t i : order) {
    sorted.intents.push_back(std::move(stats.intents[i]));
    sorted.centroids.push_back(std::move(stats.centroids[i]));
    sorted.counts.push_back(stats.counts[i]);
  }
  for (const auto& c : sorted.centroids)
    if (c.size() != sorted.dim) throw DataError(path + ": centroid dimension mismatch");
  if (sorted.sigma_diag.size() != sorted.dim)
    throw DataError(path + ": covariance dimension mismatch");
  return sorted;
}

}  // namespace chatcheck::cx
