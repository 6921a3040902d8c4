#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "chatcheck/common.hpp"
#include "chatcheck/complexity.hpp"
#include "chatcheck/corpus.hpp"
#include "chatcheck/harness.hpp"
#include "chatcheck/mathutil.hpp"
#include "chatcheck/slicer.hpp"

namespace chatcheck::drift {

using corpus::ConversationLog;
using corpus::Dataset;
using corpus::Outcome;
using corpus::Speaker;
using cx::ClassStats;
using cx::ConfusionHeatmap;

// ---------------------------------------------------------------------------
// KPIs

struct KpiConfig {
  int turn_budget = 6;
  std::int64_t new_topic_clusters = 0;  // observed candidate clusters, for the coverage KPI
};

struct KpiReport {
  std::int64_t total = 0;
  double containment_rate = 0.0;
  double escalated_rate = 0.0;
  double abandoned_rate = 0.0;
  std::int64_t off_hours_count = 0;
  std::optional<double> off_hours_handled_rate;  // absent when no off-hours traffic
  std::optional<double> coverage;                // intents seen / (seen + candidate clusters)
  double mean_turns_to_outcome = 0.0;
  std::optional<double> escalation_timeliness;   // absent when nothing escalated
};

inline KpiReport compute_kpis(std::span<const ConversationLog> logs, const KpiConfig& config) {
  if (logs.empty()) throw DataError("compute_kpis: no conversations");
  KpiReport report;
  report.total = static_cast<std::int64_t>(logs.size());
  std::int64_t contained = 0, escalated = 0, abandoned = 0;
  std::int64_t off_hours = 0, off_hours_contained = 0;
  std::int64_t timely = 0;
  double turns_sum = 0.0;
  std::set<std::string> intents_seen;
  for (const auto& log : logs) {
    switch (log.outcome) {
      case Outcome::kContained: ++contained; break;
      case Outcome::kEscalated: ++escalated; break;
      case Outcome::kAbandoned: ++abandoned; break;
    }
    if (!log.business_hours) {
      ++off_hours;
      if (log.outcome == Outcome::kContained) ++off_hours_contained;
    }
    turns_sum += static_cast<double>(log.turns.size());
    for (const auto& t : log.turns)
      if (t.resolved_intent) intents_seen.insert(*t.resolved_intent);
    if (log.outcome == Outcome::kEscalated) {
      std::int64_t user_turns = 0;
      for (const auto& t : log.turns) {
        if (t.speaker == Speaker::kAgent) break;
        if (t.speaker == Speaker::kUser) ++user_turns;
      }
      if (user_turns <= config.turn_budget) ++timely;
    }
  }
  const double total = static_cast<double>(report.total);
  report.containment_rate = static_cast<double>(contained) / total;
  report.escalated_rate = static_cast<double>(escalated) / total;
  report.abandoned_rate = static_cast<double>(abandoned) / total;
  report.off_hours_count = off_hours;
  if (off_hours > 0)
    report.off_hours_handled_rate =
        static_cast<double>(off_hours_contained) / static_cast<double>(off_hours);
  report.mean_turns_to_outcome = turns_sum / total;
  if (escalated > 0)
    report.escalation_timeliness = static_cast<double>(timely) / static_cast<double>(escalated);
  const auto seen = static_cast<std::int64_t>(intents_seen.size());
  if (seen + config.new_topic_clusters > 0)
    report.coverage =
        static_cast<double>(seen) / static_cast<double>(seen + config.new_topic_clusters);
  return report;
}

// ---------------------------------------------------------------------------
// Baseline

struct KpiRef {
  double mean = 0.0;
  double sigma = 0.0;   // used for non-rate KPIs; rates get a binomial sigma
  bool is_rate = true;
};

struct Baseline {
  std::map<std::string, double> intent_freqs;
  std::optional<ClassStats> stats;
  double window_start = 0.0;
  double window_end = 0.0;
  std::int64_t sample_count = 0;
  std::map<std::string, KpiRef> kpi_refs;
};

struct BaselineConfig {
  std::int64_t min_samples = 200;
  int subwindows = 8;
  int turn_budget = 6;
};

// Intent frequencies and KPI reference values from a verified window of logs.
// Dispersion for non-rate KPIs comes from contiguous sub-windows.
inline Baseline build_baseline(std::span<const ConversationLog> logs,
                               const std::optional<ClassStats>& stats,
                               const BaselineConfig& config) {
  if (static_cast<std::int64_t>(logs.size()) < config.min_samples)
    throw DataError("baseline window has " + std::to_string(logs.size()) +
                    " conversations; need at least " + std::to_string(config.min_samples));
  Baseline baseline;
  baseline.stats = stats;
  baseline.sample_count = static_cast<std::int64_t>(logs.size());
  baseline.window_start = logs.front().start_ts();
  baseline.window_end = logs.back().start_ts();
  std::map<std::string, std::int64_t> counts;
  std::int64_t total = 0;
  for (const auto& log : logs)
    for (const auto& t : log.turns)
      if (t.resolved_intent) {
        ++counts[*t.resolved_intent];
        ++total;
      }
  if (total == 0) throw DataError("baseline window has no resolved intents");
  for (const auto& [intent, c] : counts)
    baseline.intent_freqs[intent] = static_cast<double>(c) / static_cast<double>(total);

  const KpiConfig kpi_config{config.turn_budget, 0};
  const auto whole = compute_kpis(logs, kpi_config);
  baseline.kpi_refs["containment_rate"] = KpiRef{whole.containment_rate, 0.0, true};
  if (whole.off_hours_handled_rate)
    baseline.kpi_refs["off_hours_handled_rate"] = KpiRef{*whole.off_hours_handled_rate, 0.0, true};
  if (whole.escalation_timeliness)
    baseline.kpi_refs["escalation_timeliness"] = KpiRef{*whole.escalation_timeliness, 0.0, true};
  // Sub-window dispersion for the continuous KPIs.
  const int sw = std::max(1, config.subwindows);
  std::vector<double> turns_values;
  const std::size_t per = logs.size() / static_cast<std::size_t>(sw);
  if (per >= 1) {
    for (int w = 0; w < sw; ++w) {
      const std::size_t lo = static_cast<std::size_t>(w) * per;
      const std::size_t hi = (w == sw - 1) ? logs.size() : lo + per;
      const auto sub = compute_kpis(logs.subspan(lo, hi - lo), kpi_config);
      turns_values.push_back(sub.mean_turns_to_outcome);
    }
  } else {
    turns_values.push_back(whole.mean_turns_to_outcome);
  }
  baseline.kpi_refs["mean_turns_to_outcome"] =
      KpiRef{mean_of(turns_values), std::sqrt(population_variance(turns_values)), false};
  return baseline;
}

// ---------------------------------------------------------------------------
// Drift alerts

struct DriftAlert {
  enum class Kind { kDistributionShift, kNewTopicCandidate, kKpiDivergence };
  Kind kind = Kind::kDistributionShift;
  double statistic = 0.0;
  std::optional<double> p_value;
  std::optional<double> sigma_distance;
  std::string window;
  std::vector<std::string> affected;  // intents, cluster member ids, or KPI name
  std::string detail;
};

inline const char* to_string(DriftAlert::Kind k) {
  switch (k) {
    case DriftAlert::Kind::kDistributionShift: return "distribution_shift";
    case DriftAlert::Kind::kNewTopicCandidate: return "new_topic_candidate";
    case DriftAlert::Kind::kKpiDivergence: return "kpi_divergence";
  }
  return "distribution_shift";
}

// Chi-square goodness of fit of the window's intent counts against the
// baseline frequencies. Cells with expected count below 5 are pooled (unseen
// intents land in the pool; a pool with zero expectation is merged into the
// smallest expected cell so the statistic stays finite).
inline std::optional<DriftAlert> detect_distribution_drift(const Baseline& baseline,
                                                           std::span<const ConversationLog> window,
                                                           double alpha = 0.01,
                                                           std::int64_t min_samples = 200) {
  if (static_cast<std::int64_t>(window.size()) < min_samples)
    throw DataError("drift window has " + std::to_string(window.size()) +
                    " conversations; need at least " + std::to_string(min_samples));
  std::map<std::string, std::int64_t> counts;
  std::int64_t total = 0;
  for (const auto& log : window)
    for (const auto& t : log.turns)
      if (t.resolved_intent) {
        ++counts[*t.resolved_intent];
        ++total;
      }
  if (total == 0) throw DataError("drift window has no resolved intents");

  struct Cell {
    std::string name;
    double expected = 0.0;
    std::int64_t observed = 0;
  };
  std::vector<Cell> cells;
  for (const auto& [intent, p] : baseline.intent_freqs) {
    Cell c;
    c.name = intent;
    c.expected = p * static_cast<double>(total);
    auto it = counts.find(intent);
    c.observed = it == counts.end() ? 0 : it->second;
    cells.push_back(std::move(c));
  }
  Cell other;
  other.name = "OTHER";
  for (const auto& [intent, c] : counts)
    if (!baseline.intent_freqs.count(intent)) other.observed += c;
  // Pool low-expectation cells into OTHER.
  std::vector<Cell> used;
  for (auto& c : cells) {
    if (c.expected < 5.0) {
      other.expected += c.expected;
      other.observed += c.observed;
    } else {
      used.push_back(c);
    }
  }
  if (other.expected > 0.0 || other.observed > 0) {
    if (other.expected <= 0.0) {
      if (used.empty()) throw DataError("degenerate drift test: single cell");
      std::size_t smallest = 0;
      for (std::size_t i = 1; i < used.size(); ++i)
        if (used[i].expected < used[smallest].expected) smallest = i;
      used[smallest].observed += other.observed;
      used[smallest].name += "+OTHER";
    } else {
      used.push_back(other);
    }
  }
  if (used.size() < 2) throw DataError("degenerate drift test: single cell");
  double statistic = 0.0;
  for (const auto& c : used) {
    const double d = static_cast<double>(c.observed) - c.expected;
    statistic += d * d / c.expected;
  }
  const double df = static_cast<double>(used.size() - 1);
  const double p = chi2_survival(statistic, df);
  if (!(p < alpha)) return std::nullopt;
  DriftAlert alert;
  alert.kind = DriftAlert::Kind::kDistributionShift;
  alert.statistic = statistic;
  alert.p_value = p;
  alert.window = "n=" + std::to_string(window.size());
  // Top contributors by absolute standardized residual over the original cells.
  std::vector<std::pair<double, std::string>> residuals;
  for (const auto& c : cells) {
    const double denom = std::sqrt(std::max(c.expected, 0.25));
    residuals.emplace_back(std::fabs(static_cast<double>(c.observed) - c.expected) / denom, c.name);
  }
  for (const auto& [intent, c] : counts)
    if (!baseline.intent_freqs.count(intent))
      residuals.emplace_back(static_cast<double>(c) / 0.5, intent);
  std::sort(residuals.begin(), residuals.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t i = 0; i < residuals.size() && i < 5; ++i)
    alert.affected.push_back(residuals[i].second);
  alert.detail = "chi-square " + fmt_double(statistic) + ", df " + fmt_double(df);
  return alert;
}

// ---------------------------------------------------------------------------
// Out-of-distribution new-topic candidates

struct NewTopicConfig {
  double quantile = 0.99;
  std::int64_t min_cluster = 5;
};

struct TopicCluster {
  std::vector<std::string> member_ids;
  std::vector<double> centroid;
  double mean_min_distance = 0.0;
};

struct NewTopicResult {
  std::vector<TopicCluster> candidates;
  std::vector<std::string> ood_ids;
  std::int64_t noise_points = 0;
  double threshold = 0.0;
};

inline double min_distance_over_intents(std::span<const double> x, const ClassStats& stats) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& centroid : stats.centroids)
    best = std::min(best, cx::detail::distance_to(x, centroid, stats));
  return best;
}

// Radius for OOD decisions: the given quantile of the training examples'
// minimum Mahalanobis distances.
inline double ood_threshold(const Dataset& train, const ClassStats& stats, double quantile) {
  if (!train.embedded()) throw DataError("ood_threshold requires an embedded dataset");
  if (!(quantile > 0.0 && quantile <= 1.0)) throw ConfigError("quantile must be in (0,1]");
  std::vector<double> dists;
  dists.reserve(train.size());
  for (const auto& ex : train.examples)
    dists.push_back(min_distance_over_intents(*ex.embedding, stats));
  std::sort(dists.begin(), dists.end());
  return percentile_linear(dists, quantile);
}

// Greedy centroid-linkage agglomeration in the pooled-covariance metric:
// repeatedly merge the nearest pair of clusters while their centroid distance
// stays within the radius. Returns a cluster id per point.
inline std::vector<int> agglomerate(const std::vector<std::vector<double>>& points,
                                    const ClassStats& stats, double radius) {
  const std::size_t n = points.size();
  std::vector<int> assign(n);
  std::vector<std::vector<double>> centroids = points;
  std::vector<std::int64_t> sizes(n, 1);
  std::vector<bool> alive(n, true);
  for (std::size_t i = 0; i < n; ++i) assign[i] = static_cast<int>(i);
  while (true) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < n; ++a) {
      if (!alive[a]) continue;
      for (std::size_t b = a + 1; b < n; ++b) {
        if (!alive[b]) continue;
        const double d = cx::detail::distance_to(centroids[a], centroids[b], stats);
        if (d < best) {
          best = d;
          ba = a;
          bb = b;
        }
      }
    }
    if (!(best <= radius) || !std::isfinite(best)) break;
    // merge bb into ba
    const double na = static_cast<double>(sizes[ba]);
    const double nb = static_cast<double>(sizes[bb]);
    for (std::size_t d = 0; d < centroids[ba].size(); ++d)
      centroids[ba][d] = (centroids[ba][d] * na + centroids[bb][d] * nb) / (na + nb);
    sizes[ba] += sizes[bb];
    alive[bb] = false;
    for (std::size_t i = 0; i < n; ++i)
      if (assign[i] == static_cast<int>(bb)) assign[i] = static_cast<int>(ba);
    if (std::count(alive.begin(), alive.end(), true) < 2) break;
  }
  // Renumber cluster ids densely, ordered by first member.
  std::map<int, int> renumber;
  for (std::size_t i = 0; i < n; ++i)
    if (!renumber.count(assign[i])) {
      const int next = static_cast<int>(renumber.size());
      renumber[assign[i]] = next;
    }
  for (auto& a : assign) a = renumber[a];
  return assign;
}

inline NewTopicResult detect_new_topics(
    const std::vector<std::pair<std::string, std::vector<double>>>& utterances,
    const ClassStats& stats, double threshold, const NewTopicConfig& config = {}) {
  if (stats.intents.empty()) throw DataError("detect_new_topics: no fitted class stats");
  NewTopicResult result;
  result.threshold = threshold;
  if (utterances.empty()) return result;
  std::vector<std::size_t> ood_index;
  std::vector<std::vector<double>> ood_points;
  std::vector<double> ood_dists;
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    const auto& [id, vec] = utterances[i];
    if (vec.size() != stats.dim) throw DataError("utterance '" + id + "' has wrong dimension");
    const double d = min_distance_over_intents(vec, stats);
    if (d > threshold) {
      ood_index.push_back(i);
      ood_points.push_back(vec);
      ood_dists.push_back(d);
      result.ood_ids.push_back(id);
    }
  }
  if (ood_points.empty()) return result;
  const auto assign = agglomerate(ood_points, stats, threshold);
  std::map<int, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < assign.size(); ++i)
    clusters[assign[i]].push_back(i);
  for (const auto& [_, members] : clusters) {
    if (static_cast<std::int64_t>(members.size()) < config.min_cluster) {
      result.noise_points += static_cast<std::int64_t>(members.size());
      continue;
    }
    TopicCluster cluster;
    cluster.centroid.assign(stats.dim, 0.0);
    double dist_sum = 0.0;
    for (std::size_t m : members) {
      cluster.member_ids.push_back(utterances[ood_index[m]].first);
      dist_sum += ood_dists[m];
      for (std::size_t d = 0; d < stats.dim; ++d) cluster.centroid[d] += ood_points[m][d];
    }
    for (double& c : cluster.centroid) c /= static_cast<double>(members.size());
    cluster.mean_min_distance = dist_sum / static_cast<double>(members.size());
    result.candidates.push_back(std::move(cluster));
  }
  std::sort(result.candidates.begin(), result.candidates.end(),
            [](const TopicCluster& a, const TopicCluster& b) {
              if (a.member_ids.size() != b.member_ids.size())
                return a.member_ids.size() > b.member_ids.size();
              return a.member_ids < b.member_ids;
            });
  return result;
}

inline NewTopicResult detect_new_topics(
    const std::vector<std::pair<std::string, std::vector<double>>>& utterances,
    const ClassStats& stats, const Dataset& train, const NewTopicConfig& config = {}) {
  return detect_new_topics(utterances, stats, ood_threshold(train, stats, config.quantile),
                           config);
}

inline std::vector<DriftAlert> new_topic_alerts(const NewTopicResult& topics) {
  std::vector<DriftAlert> alerts;
  for (const auto& cluster : topics.candidates) {
    DriftAlert alert;
    alert.kind = DriftAlert::Kind::kNewTopicCandidate;
    alert.statistic = cluster.mean_min_distance;
    alert.affected = cluster.member_ids;
    alert.detail = std::to_string(cluster.member_ids.size()) +
                   " utterances beyond the OOD radius " + fmt_double(topics.threshold);
    alerts.push_back(std::move(alert));
  }
  return alerts;
}

// ---------------------------------------------------------------------------
// KPI control charts (Shewhart, mean +/- 3 sigma)

struct KpiWindowValue {
  std::string kpi;
  double value = 0.0;
  std::int64_t n = 0;
  std::string window_label;
};

inline std::vector<DriftAlert> kpi_control(std::span<const KpiWindowValue> series,
                                           const Baseline& baseline) {
  std::vector<DriftAlert> alerts;
  for (const auto& w : series) {
    if (w.n <= 0) throw DataError("zero-width KPI window '" + w.window_label + "'");
    auto it = baseline.kpi_refs.find(w.kpi);
    if (it == baseline.kpi_refs.end())
      throw DataError("baseline has no reference for KPI '" + w.kpi + "'");
    const KpiRef& ref = it->second;
    const double sigma = ref.is_rate
                             ? std::sqrt(ref.mean * (1.0 - ref.mean) / static_cast<double>(w.n))
                             : ref.sigma;
    const double dev = std::fabs(w.value - ref.mean);
    bool out;
    double distance;
    if (sigma > 0.0) {
      distance = dev / sigma;
      out = distance > 3.0;
    } else {
      distance = dev == 0.0 ? 0.0 : 1e9;
      out = dev != 0.0;
    }
    if (!out) continue;
    DriftAlert alert;
    alert.kind = DriftAlert::Kind::kKpiDivergence;
    alert.statistic = w.value;
    alert.sigma_distance = distance;
    alert.window = w.window_label.empty() ? "n=" + std::to_string(w.n) : w.window_label;
    alert.affected = {w.kpi};
    alert.detail = w.kpi + " " + fmt_double(w.value) + " vs baseline " + fmt_double(ref.mean) +
                   (sigma > 0.0 ? " (" + fmt_double(distance) + " sigma)"
                                : " (zero-variance reference; any deviation is out of control)");
    alerts.push_back(std::move(alert));
  }
  return alerts;
}

// ---------------------------------------------------------------------------
// Remediation suggestions

struct Remediation {
  enum class Action {
    kRelabel,
    kAddSamples,
    kRemoveSamples,
    kNewIntent,
    kArchiveIntent,
    kSplitIntent,
    kMergeIntents
  };
  struct Evidence {
    std::string kind;    // heatmap_cell | slice | cluster | example | frequency_series
    std::string detail;
    std::vector<std::string> refs;
  };
  Action action = Action::kRelabel;
  std::vector<std::string> target_intents;
  std::vector<std::string> target_example_ids;
  std::vector<Evidence> evidence;
  std::string rationale;
  // Payload examples for what-if application of add_samples / new_intent.
  std::vector<corpus::LabeledExample> examples_to_add;
};

inline const char* to_string(Remediation::Action a) {
  switch (a) {
    case Remediation::Action::kRelabel: return "relabel";
    case Remediation::Action::kAddSamples: return "add_samples";
    case Remediation::Action::kRemoveSamples: return "remove_samples";
    case Remediation::Action::kNewIntent: return "new_intent";
    case Remediation::Action::kArchiveIntent: return "archive_intent";
    case Remediation::Action::kSplitIntent: return "split_intent";
    case Remediation::Action::kMergeIntents: return "merge_intents";
  }
  return "relabel";
}

inline Remediation::Action remediation_action_from_string(const std::string& s) {
  for (auto a : {Remediation::Action::kRelabel, Remediation::Action::kAddSamples,
                 Remediation::Action::kRemoveSamples, Remediation::Action::kNewIntent,
                 Remediation::Action::kArchiveIntent, Remediation::Action::kSplitIntent,
                 Remediation::Action::kMergeIntents})
    if (s == to_string(a)) return a;
  throw ConfigError("unknown remediation action '" + s + "'");
}

struct SuggestConfig {
  double merge_threshold = 0.3;
  double relabel_threshold = 2.0;
  std::int64_t split_min_size = 20;
  double cluster_radius = 0.0;  // 0 disables the split-intent rule
  double archive_freq = 0.005;
  int archive_windows = 3;
  std::optional<double> complexity_high_cutoff;  // enables the add_samples rule
  std::string complexity_feature = "COMPLEXITY";
};

struct SuggestInputs {
  const ConfusionHeatmap* heatmap = nullptr;
  const std::vector<slicer::Slice>* slices = nullptr;
  const std::vector<slicer::SliceRecord>* slice_records = nullptr;
  const NewTopicResult* topics = nullptr;
  const Dataset* train = nullptr;
  const ClassStats* stats = nullptr;
  // Per-window intent frequencies, oldest first.
  const std::vector<std::map<std::string, double>>* window_freqs = nullptr;
};

inline std::vector<Remediation> suggest_remediations(const SuggestInputs& in,
                                                     const SuggestConfig& config) {
  std::vector<Remediation> out;
  // (a) mutual confusion -> merge; (b) one-directional confusion of a large,
  // multi-modal intent -> split.
  if (in.heatmap) {
    const auto& hm = *in.heatmap;
    for (std::size_t a = 0; a < hm.intents.size(); ++a) {
      for (std::size_t b = a + 1; b < hm.intents.size(); ++b) {
        const double ab = hm.matrix[a][b];
        const double ba = hm.matrix[b][a];
        if (ab > config.merge_threshold && ba > config.merge_threshold) {
          Remediation r;
          r.action = Remediation::Action::kMergeIntents;
          r.target_intents = {hm.intents[a], hm.intents[b]};
          r.evidence.push_back({"heatmap_cell",
                                "C[" + hm.intents[a] + "][" + hm.intents[b] + "]=" + fmt_double(ab) +
                                    ", C[" + hm.intents[b] + "][" + hm.intents[a] + "]=" +
                                    fmt_double(ba),
                                {hm.intents[a], hm.intents[b]}});
          r.rationale = "intents are confused in both directions; labeling may be too fine-grained";
          out.push_back(std::move(r));
          continue;
        }
        // One-directional cases, either orientation.
        for (const auto& [src, dst, c_sd, c_ds] :
             {std::tuple{a, b, ab, ba}, std::tuple{b, a, ba, ab}}) {
          if (!(c_sd > config.merge_threshold && c_ds <= config.merge_threshold)) continue;
          if (!in.train || !in.stats || config.cluster_radius <= 0.0) continue;
          auto it = in.train->intent_index.find(hm.intents[src]);
          if (it == in.train->intent_index.end()) continue;
          if (static_cast<std::int64_t>(it->second.size()) < config.split_min_size) continue;
          std::vector<std::vector<double>> pts;
          for (std::size_t idx : it->second) pts.push_back(*in.train->examples[idx].embedding);
          const auto assign = agglomerate(pts, *in.stats, config.cluster_radius);
          std::set<int> distinct(assign.begin(), assign.end());
          if (distinct.size() < 2) continue;
          Remediation r;
          r.action = Remediation::Action::kSplitIntent;
          r.target_intents = {hm.intents[src]};
          r.evidence.push_back({"heatmap_cell",
                                "C[" + hm.intents[src] + "][" + hm.intents[dst] + "]=" +
                                    fmt_double(c_sd) + " with " + std::to_string(distinct.size()) +
                                    " sub-clusters",
                                {hm.intents[src], hm.intents[dst]}});
          r.rationale = "one-directional confusion from a multi-modal intent; labeling may be too general";
          out.push_back(std::move(r));
        }
      }
    }
  }
  // (c) individual high-complexity examples -> relabel toward the nearest
  // other intent.
  if (in.train && in.stats && in.stats->intents.size() >= 2) {
    for (const auto& ex : in.train->examples) {
      if (!ex.embedding) continue;
      if (in.stats->index_of(ex.intent) < 0) continue;
      const auto d = cx::utterance_complexity_detail(*ex.embedding, ex.intent, *in.stats);
      if (d.h <= config.relabel_threshold) continue;
      Remediation r;
      r.action = Remediation::Action::kRelabel;
      r.target_intents = {d.nearest_other};
      r.target_example_ids = {ex.id};
      r.evidence.push_back({"example",
                            "h=" + fmt_double(d.h) + " for '" + ex.id + "' (gold " + ex.intent +
                                ", nearest " + d.nearest_other + ")",
                            {ex.id}});
      r.rationale = "example sits far inside another intent's region; the label looks wrong";
      out.push_back(std::move(r));
    }
  }
  // (d) new-topic clusters -> new intents.
  if (in.topics) {
    for (const auto& cluster : in.topics->candidates) {
      Remediation r;
      r.action = Remediation::Action::kNewIntent;
      r.target_example_ids = cluster.member_ids;
      r.evidence.push_back({"cluster",
                            std::to_string(cluster.member_ids.size()) +
                                " out-of-distribution utterances form a stable cluster",
                            cluster.member_ids});
      r.rationale = "consistent traffic outside every known intent";
      out.push_back(std::move(r));
    }
  }
  // (e) persistently quiet intents -> archive.
  if (in.window_freqs && static_cast<int>(in.window_freqs->size()) >= config.archive_windows) {
    std::set<std::string> universe;
    for (const auto& w : *in.window_freqs)
      for (const auto& [intent, _] : w) universe.insert(intent);
    if (in.train)
      for (const auto& [intent, _] : in.train->intent_index) universe.insert(intent);
    const auto& windows = *in.window_freqs;
    for (const auto& intent : universe) {
      bool quiet = true;
      for (std::size_t w = windows.size() - static_cast<std::size_t>(config.archive_windows);
           w < windows.size(); ++w) {
        auto it = windows[w].find(intent);
        const double f = it == windows[w].end() ? 0.0 : it->second;
        if (f >= config.archive_freq) {
          quiet = false;
          break;
        }
      }
      if (!quiet) continue;
      Remediation r;
      r.action = Remediation::Action::kArchiveIntent;
      r.target_intents = {intent};
      r.evidence.push_back({"frequency_series",
                            "frequency below " + fmt_double(config.archive_freq) + " for " +
                                std::to_string(config.archive_windows) + " consecutive windows",
                            {intent}});
      r.rationale = "intent no longer sees traffic";
      out.push_back(std::move(r));
    }
  }
  // (f) significant high-complexity slices -> add samples for the dominant
  // intents of the slice.
  if (in.slices && in.slice_records && config.complexity_high_cutoff) {
    for (const auto& slice : *in.slices) {
      if (!slice.significant || slice.terms.size() != 1) continue;
      const auto& term = slice.terms[0];
      if (term.feature != config.complexity_feature || !term.interval) continue;
      if (term.interval->first < *config.complexity_high_cutoff) continue;
      std::map<std::string, std::int64_t> gold_counts;
      std::int64_t matched = 0;
      for (const auto& rec : *in.slice_records) {
        if (!slice.matches(rec) || !rec.gold) continue;
        ++gold_counts[*rec.gold];
        ++matched;
      }
      if (matched == 0) continue;
      std::vector<std::pair<std::int64_t, std::string>> ranked;
      for (const auto& [intent, c] : gold_counts) ranked.emplace_back(c, intent);
      std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
      Remediation r;
      r.action = Remediation::Action::kAddSamples;
      std::int64_t cum = 0;
      for (const auto& [c, intent] : ranked) {
        if (r.target_intents.size() >= 3 || cum * 2 >= matched) break;
        r.target_intents.push_back(intent);
        cum += c;
      }
      if (r.target_intents.empty()) r.target_intents.push_back(ranked[0].second);
      r.evidence.push_back(
          {"slice", slice.label() + " acc=" + fmt_double(slice.accuracy) + " p=" +
                        fmt_double(slice.adjusted_p),
           r.target_intents});
      r.rationale = "high-complexity region with significant error concentration; these intents need more training data";
      out.push_back(std::move(r));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// What-if impact analysis: apply a remediation to a copy of the training
// data, refit the reference classifier, and compare test metrics. Inputs are
// never mutated.

struct Metrics {
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
};

struct WhatIfResult {
  Metrics before;
  Metrics after;
  double accuracy_delta = 0.0;
  double balanced_accuracy_delta = 0.0;
};

struct WhatIfConfig {
  double ridge = 1e-3;
  double temperature = 1.0;
  double split_radius = 0.0;  // 0 -> derived from the train OOD radius (quantile 0.99)
};

namespace detail {

// Evaluate with optional label projections: gold labels through gold_map
// (merges), predictions through pred_map (splits fold back to the parent).
inline Metrics evaluate(const Dataset& test, const harness::ReferenceClassifier& clf,
                        const std::map<std::string, std::string>& gold_map,
                        const std::map<std::string, std::string>& pred_map) {
  if (!test.embedded()) throw DataError("what-if evaluation requires an embedded test set");
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> per_class;
  std::int64_t correct = 0, total = 0;
  for (const auto& ex : test.examples) {
    std::string gold = ex.intent;
    if (auto it = gold_map.find(gold); it != gold_map.end()) gold = it->second;
    auto pred = harness::classify(*ex.embedding, clf).intent;
    if (auto it = pred_map.find(pred); it != pred_map.end()) pred = it->second;
    ++total;
    auto& cls = per_class[gold];
    ++cls.first;
    if (pred == gold) {
      ++correct;
      ++cls.second;
    }
  }
  Metrics m;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  double recall_sum = 0.0;
  for (const auto& [_, cls] : per_class)
    recall_sum += static_cast<double>(cls.second) / static_cast<double>(cls.first);
  m.balanced_accuracy = recall_sum / static_cast<double>(per_class.size());
  return m;
}

}  // namespace detail

inline WhatIfResult impact_whatif(const Dataset& train, const Dataset& test,
                                  const Remediation& remediation, const WhatIfConfig& config = {}) {
  if (!train.embedded() || !test.embedded())
    throw DataError("impact_whatif requires embedded train and test datasets");
  const auto base_stats = cx::fit_class_stats(train, config.ridge);
  const harness::ReferenceClassifier before_clf{base_stats, config.temperature};

  std::vector<corpus::LabeledExample> rows = train.examples;
  std::map<std::string, std::string> gold_map, pred_map;
  Dataset eval_test = test;

  const auto require_intent = [&](const std::string& intent) {
    if (!train.intent_index.count(intent))
      throw DataError("remediation target intent '" + intent + "' is not in the training data");
  };

  switch (remediation.action) {
    case Remediation::Action::kMergeIntents: {
      if (remediation.target_intents.size() < 2)
        throw DataError("merge_intents needs at least two target intents");
      for (const auto& intent : remediation.target_intents) require_intent(intent);
      std::vector<std::string> sorted = remediation.target_intents;
      std::sort(sorted.begin(), sorted.end());
      std::string joint;
      for (std::size_t i = 0; i < sorted.size(); ++i) joint += (i ? "+" : "") + sorted[i];
      for (auto& ex : rows)
        if (std::find(sorted.begin(), sorted.end(), ex.intent) != sorted.end()) ex.intent = joint;
      for (const auto& intent : sorted) gold_map[intent] = joint;
      break;
    }
    case Remediation::Action::kSplitIntent: {
      if (remediation.target_intents.size() != 1)
        throw DataError("split_intent needs exactly one target intent");
      const std::string& intent = remediation.target_intents[0];
      require_intent(intent);
      double radius = config.split_radius;
      if (radius <= 0.0) radius = ood_threshold(train, base_stats, 0.99);
      std::vector<std::size_t> indices = train.intent_index.at(intent);
      std::vector<std::vector<double>> pts;
      for (std::size_t i : indices) pts.push_back(*train.examples[i].embedding);
      const auto assign = agglomerate(pts, base_stats, radius);
      std::set<int> distinct(assign.begin(), assign.end());
      if (distinct.size() < 2)
        throw DataError("split_intent: no sub-cluster structure found in '" + intent + "'");
      for (std::size_t i = 0; i < indices.size(); ++i) {
        const std::string part = intent + "::" + std::to_string(assign[i]);
        rows[indices[i]].intent = part;
        pred_map[part] = intent;
      }
      break;
    }
    case Remediation::Action::kRelabel: {
      if (remediation.target_intents.size() != 1 || remediation.target_example_ids.empty())
        throw DataError("relabel needs one target intent and at least one example id");
      for (const auto& id : remediation.target_example_ids) {
        auto it = train.id_index.find(id);
        if (it == train.id_index.end())
          throw DataError("remediation target example '" + id + "' is not in the training data");
        rows[it->second].intent = remediation.target_intents[0];
      }
      break;
    }
    case Remediation::Action::kRemoveSamples: {
      if (remediation.target_example_ids.empty())
        throw DataError("remove_samples needs example ids");
      std::set<std::string> drop(remediation.target_example_ids.begin(),
                                 remediation.target_example_ids.end());
      for (const auto& id : drop)
        if (!train.id_index.count(id))
          throw DataError("remediation target example '" + id + "' is not in the training data");
      std::vector<corpus::LabeledExample> kept;
      for (auto& ex : rows)
        if (!drop.count(ex.id)) kept.push_back(std::move(ex));
      rows = std::move(kept);
      break;
    }
    case Remediation::Action::kAddSamples:
    case Remediation::Action::kNewIntent: {
      if (remediation.examples_to_add.empty())
        throw DataError("what-if for add_samples/new_intent needs payload examples");
      for (const auto& ex : remediation.examples_to_add) {
        if (!ex.embedding) throw DataError("payload example '" + ex.id + "' has no embedding");
        rows.push_back(ex);
      }
      break;
    }
    case Remediation::Action::kArchiveIntent: {
      if (remediation.target_intents.size() != 1)
        throw DataError("archive_intent needs exactly one target intent");
      const std::string& intent = remediation.target_intents[0];
      require_intent(intent);
      std::vector<corpus::LabeledExample> kept;
      for (auto& ex : rows)
        if (ex.intent != intent) kept.push_back(std::move(ex));
      rows = std::move(kept);
      if (rows.empty()) throw DataError("archive_intent would empty the training data");
      // The archived intent is no longer served; score only the remaining test intents.
      std::vector<corpus::LabeledExample> test_rows;
      for (const auto& ex : test.examples)
        if (ex.intent != intent) test_rows.push_back(ex);
      if (test_rows.empty()) throw DataError("archive_intent leaves no test examples");
      eval_test = Dataset::from_examples(std::move(test_rows));
      break;
    }
  }

  Dataset after_train = Dataset::from_examples(std::move(rows));
  const auto after_stats = cx::fit_class_stats(after_train, config.ridge);
  const harness::ReferenceClassifier after_clf{after_stats, config.temperature};

  WhatIfResult result;
  result.before = detail::evaluate(eval_test, before_clf, {}, {});
  result.after = detail::evaluate(eval_test, after_clf, gold_map, pred_map);
  result.accuracy_delta = result.after.accuracy - result.before.accuracy;
  result.balanced_accuracy_delta =
      result.after.balanced_accuracy - result.before.balanced_accuracy;
  return result;
}

// ---------------------------------------------------------------------------
// Baseline persistence (single JSON file embedding the class stats).

inline void save_baseline(const Baseline& baseline, const std::string& path) {
  nlohmann::json j;
  j["intent_freqs"] = baseline.intent_freqs;
  j["window"] = {{"start", baseline.window_start},
                 {"end", baseline.window_end},
                 {"count", baseline.sample_count}};
  nlohmann::json refs;
  for (const auto& [name, ref] : baseline.kpi_refs)
    refs[name] = {{"mean", ref.mean}, {"sigma", ref.sigma}, {"is_rate", ref.is_rate}};
  j["kpi_refs"] = std::move(refs);
  if (baseline.stats) {
    nlohmann::json s;
    s["dim"] = baseline.stats->dim;
    s["ridge"] = baseline.stats->ridge;
    s["sigma_diag"] = baseline.stats->sigma_diag;
    s["intents"] = baseline.stats->intents;
    s["centroids"] = baseline.stats->centroids;
    s["counts"] = baseline.stats->counts;
    j["class_stats"] = std::move(s);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file '" + path + "'");
  out << j.dump(2) << '\n';
}

inline Baseline load_baseline(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open baseline file '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("baseline file '" + path + "' is not valid JSON");
  Baseline baseline;
  baseline.intent_freqs = j.at("intent_freqs").get<std::map<std::string, double>>();
  baseline.window_start = j.at("window").at("start").get<double>();
  baseline.window_end = j.at("window").at("end").get<double>();
  baseline.sample_count = j.at("window").at("count").get<std::int64_t>();
  for (const auto& [name, ref] : j.at("kpi_refs").items())
    baseline.kpi_refs[name] = KpiRef{ref.at("mean").get<double>(), ref.at("sigma").get<double>(),
                                     ref.at("is_rate").get<bool>()};
  if (j.contains("class_stats")) {
    const auto& s = j["class_stats"];
    ClassStats stats;
    stats.dim = s.at("dim").get<std::size_t>();
    stats.ridge = s.at("ridge").get<double>();
    stats.sigma_diag = s.at("sigma_diag").get<std::vector<double>>();
    stats.intents = s.at("intents").get<std::vector<std::string>>();
    stats.centroids = s.at("centroids").get<std::vector<std::vector<double>>>();
    stats.counts = s.at("counts").get<std::vector<std::int64_t>>();
    baseline.stats = std::move(stats);
  }
  return baseline;
}

}  // namespace chatcheck::drift
