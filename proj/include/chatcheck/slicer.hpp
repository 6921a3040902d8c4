#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chatcheck/common.hpp"
#include "chatcheck/mathutil.hpp"
#include "chatcheck/metafeatures.hpp"

namespace chatcheck::slicer {

namespace detail {

// pmf(k) of Hypergeometric(N, K, n) as a cancellation-free product of n
// factors with power-of-2 rescaling:
//   pmf(k) = prod_{i<k} (K-i)(n-i) / ((i+1)(N-i))
//          * prod_{j<n-k} (N-K-j) / (N-k-j)
// Every factor is exact to a few ulp, so the result keeps ~1e-14 relative
// accuracy where a difference of large log-gammas would not.
inline double hypergeom_pmf_scaled(std::int64_t N, std::int64_t K, std::int64_t n, std::int64_t k,
                                   int& scale_pow2) {
  double value = 1.0;
  scale_pow2 = 0;
  auto renorm = [&] {
    while (value != 0.0 && value < 0x1p-512) {
      value *= 0x1p+256;
      scale_pow2 -= 256;
    }
    while (value > 0x1p+512) {
      value *= 0x1p-256;
      scale_pow2 += 256;
    }
  };
  // Renormalize every 8 steps: factors stay within [1e-12, N/4] for
  // N <= 1e6, so 8 steps cannot overflow or denormalize from a normalized
  // starting point.
  for (std::int64_t i = 0; i < k; ++i) {
    value *= static_cast<double>(K - i) * static_cast<double>(n - i) /
             (static_cast<double>(i + 1) * static_cast<double>(N - i));
    if ((i & 7) == 7) renorm();
  }
  renorm();
  for (std::int64_t j = 0; j < n - k; ++j) {
    value *= static_cast<double>(N - K - j) / static_cast<double>(N - k - j);
    if ((j & 7) == 7) renorm();
  }
  renorm();
  return value;
}

}  // namespace detail

// Upper tail P[X >= k] of the hypergeometric distribution with population N,
// K marked, n drawn. The anchor pmf is an exact scaled product, subsequent
// terms follow the pmf ratio, and the sum is Kahan-compensated from the
// largest term down; relative accuracy is ~1e-14 for N up to 10^6.
inline double hypergeom_tail(std::int64_t N, std::int64_t K, std::int64_t n, std::int64_t k) {
  if (N < 0 || K < 0 || n < 0 || k < 0) throw ConfigError("hypergeom_tail: negative argument");
  if (K > N || n > N) throw ConfigError("hypergeom_tail: K and n must not exceed N");
  if (k > std::min(n, K)) throw ConfigError("hypergeom_tail: k exceeds min(n, K)");
  const std::int64_t lo = std::max<std::int64_t>(0, K + n - N);
  if (k <= lo) return 1.0;
  if (K < n) std::swap(K, n);  // H(N, K, n) and H(N, n, K) share the same pmf
  const std::int64_t hi = std::min(n, K);
  int scale = 0;
  double term = detail::hypergeom_pmf_scaled(N, K, n, k, scale);
  double sum = 0.0, comp = 0.0;
  for (std::int64_t i = k; i <= hi; ++i) {
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (i == hi) break;
    const double ratio = (static_cast<double>(K - i) * static_cast<double>(n - i)) /
                         (static_cast<double>(i + 1) * static_cast<double>(N - K - n + i + 1));
    term *= ratio;
    if (ratio < 1.0 && term < sum * 1e-18) break;
  }
  const double p = std::ldexp(sum, scale);
  return std::min(1.0, std::max(0.0, p));
}

struct SliceRecord {
  std::map<std::string, FeatureValue> features;
  bool correct = false;
  std::optional<std::string> gold;
  std::optional<std::string> predicted;
};

// One conjunct of a slice definition: a categorical value or a closed
// numeric interval of a single feature.
struct SliceTerm {
  std::string feature;
  std::optional<std::string> value;
  std::optional<std::pair<double, double>> interval;

  bool matches(const SliceRecord& rec) const {
    auto it = rec.features.find(feature);
    if (it == rec.features.end()) return false;
    if (value) {
      return std::holds_alternative<std::string>(it->second) &&
             std::get<std::string>(it->second) == *value;
    }
    if (!std::holds_alternative<double>(it->second)) return false;
    const double v = std::get<double>(it->second);
    return v >= interval->first && v <= interval->second;
  }

  std::string label() const {
    if (value) return feature + "=" + *value;
    return feature + " in [" + fmt_double(interval->first) + ", " + fmt_double(interval->second) +
           "]";
  }
};

struct Slice {
  std::vector<SliceTerm> terms;  // one term, or two for interaction slices
  std::int64_t size = 0;
  std::int64_t errors = 0;
  double accuracy = 0.0;
  double p_value = 1.0;
  double adjusted_p = 1.0;
  std::optional<double> balanced_accuracy;
  bool significant = false;

  bool matches(const SliceRecord& rec) const {
    for (const auto& t : terms)
      if (!t.matches(rec)) return false;
    return true;
  }

  std::string label() const {
    std::string out;
    for (std::size_t i = 0; i < terms.size(); ++i) out += (i ? " & " : "") + terms[i].label();
    return out;
  }
};

enum class Correction { kBonferroni, kBenjaminiHochberg, kNone };

struct SliceConfig {
  double alpha = 0.01;
  std::int64_t min_support = 20;
  Correction correction = Correction::kBonferroni;
  // Cap on interval candidates per numeric feature; above it, distinct values
  // are merged into quantile buckets so that the pair count fits.
  std::int64_t max_interval_candidates = 500000;
  bool include_confidence_feature = true;
  // Interaction search: how many 1-D interval components per numeric feature
  // feed the pair candidates, and how far above alpha an unadjusted p may sit
  // and still count as near-significant.
  int interaction_components = 4;
  double near_significance_factor = 20.0;
};

struct SliceScan {
  std::vector<Slice> slices;                 // significant, sorted by p
  std::int64_t candidates_tested = 0;
  std::vector<std::string> diagnostics;
  std::map<std::string, Slice> best_per_feature;  // minimal-p enriched candidate
};

namespace detail {

struct Candidate {
  SliceTerm term;
  std::int64_t n = 0;
  std::int64_t k = 0;
  double p = 1.0;
};

struct FeatureScan {
  std::vector<Candidate> computed;  // enriched candidates with exact p
  std::int64_t tested = 0;
  bool skipped_constant = false;
};

// Log-factorial table shared by the pmf lower-bound gate.
struct LogFactTable {
  std::vector<double> lgt;
  explicit LogFactTable(std::int64_t n) {
    lgt.resize(static_cast<std::size_t>(n) + 1);
    for (std::int64_t i = 0; i <= n; ++i)
      lgt[static_cast<std::size_t>(i)] = std::lgamma(static_cast<double>(i) + 1.0);
  }
  double log_choose(std::int64_t a, std::int64_t b) const {
    return lgt[static_cast<std::size_t>(a)] - lgt[static_cast<std::size_t>(b)] -
           lgt[static_cast<std::size_t>(a - b)];
  }
};

// Scans one feature for low-accuracy candidates. Exact tail probabilities
// are only computed when the pmf lower bound says the candidate could still
// be significant or could beat the feature's current best; skipped candidates
// provably cannot.
inline FeatureScan scan_feature(const std::vector<SliceRecord>& records,
                                const std::string& feature, std::int64_t N, std::int64_t K,
                                const SliceConfig& config, const LogFactTable& lf) {
  FeatureScan out;
  const double log_alpha = std::log(config.alpha);
  double best_logp = std::numeric_limits<double>::infinity();

  auto consider = [&](SliceTerm term, std::int64_t n, std::int64_t k, bool force_exact) {
    if (n < config.min_support) return;
    ++out.tested;
    if (k * N <= K * n) return;  // not error-enriched
    const double log_pmf = lf.log_choose(K, k) + lf.log_choose(N - K, n - k) - lf.log_choose(N, n);
    if (!force_exact && log_pmf >= log_alpha && log_pmf >= best_logp) return;
    const double p = hypergeom_tail(N, K, n, k);
    best_logp = std::min(best_logp, std::log(std::max(p, 1e-320)));
    out.computed.push_back(Candidate{std::move(term), n, k, p});
  };

  const bool numeric = std::holds_alternative<double>(records[0].features.at(feature));
  if (!numeric) {
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> groups;  // value -> (n, k)
    for (const auto& rec : records) {
      const auto& v = std::get<std::string>(rec.features.at(feature));
      auto& g = groups[v];
      ++g.first;
      if (!rec.correct) ++g.second;
    }
    for (const auto& [value, nk] : groups) {
      SliceTerm term;
      term.feature = feature;
      term.value = value;
      // Categorical candidates are few; always give them an exact p so they
      // can serve as interaction parents.
      consider(std::move(term), nk.first, nk.second, /*force_exact=*/true);
    }
    return out;
  }

  std::vector<std::pair<double, bool>> vals;
  vals.reserve(records.size());
  for (const auto& rec : records)
    vals.emplace_back(std::get<double>(rec.features.at(feature)), rec.correct);
  std::sort(vals.begin(), vals.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (vals.front().first == vals.back().first) {
    out.skipped_constant = true;
    return out;
  }
  // Compress to distinct values, then to quantile buckets when the O(m^2)
  // interval count would exceed the configured cap.
  struct Group {
    double lo, hi;
    std::int64_t n = 0, k = 0;
  };
  std::vector<Group> groups;
  for (const auto& [v, correct] : vals) {
    if (groups.empty() || groups.back().lo != v) groups.push_back(Group{v, v, 0, 0});
    ++groups.back().n;
    if (!correct) ++groups.back().k;
  }
  auto pair_count = [](std::size_t m) {
    return static_cast<std::int64_t>(m) * static_cast<std::int64_t>(m + 1) / 2;
  };
  if (pair_count(groups.size()) > config.max_interval_candidates) {
    std::size_t g = groups.size();
    while (g > 2 && pair_count(g) > config.max_interval_candidates) --g;
    std::vector<Group> merged;
    const double per = static_cast<double>(vals.size()) / static_cast<double>(g);
    std::int64_t seen = 0;
    double quota = per;
    for (const auto& grp : groups) {
      if (merged.empty() || static_cast<double>(seen) >= quota) {
        merged.push_back(grp);
        while (static_cast<double>(seen) >= quota) quota += per;
      } else {
        merged.back().hi = grp.hi;
        merged.back().n += grp.n;
        merged.back().k += grp.k;
      }
      seen += grp.n;
    }
    groups = std::move(merged);
  }
  const std::size_t m = groups.size();
  std::vector<std::int64_t> cum_n(m + 1, 0), cum_k(m + 1, 0);
  for (std::size_t i = 0; i < m; ++i) {
    cum_n[i + 1] = cum_n[i] + groups[i].n;
    cum_k[i + 1] = cum_k[i] + groups[i].k;
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      const std::int64_t n = cum_n[j + 1] - cum_n[i];
      if (n < config.min_support) continue;
      const std::int64_t k = cum_k[j + 1] - cum_k[i];
      ++out.tested;
      if (k * N <= K * n) continue;
      const double log_pmf =
          lf.log_choose(K, k) + lf.log_choose(N - K, n - k) - lf.log_choose(N, n);
      if (log_pmf >= log_alpha && log_pmf >= best_logp) continue;
      const double p = hypergeom_tail(N, K, n, k);
      best_logp = std::min(best_logp, std::log(std::max(p, 1e-320)));
      SliceTerm term;
      term.feature = feature;
      term.interval = {groups[i].lo, groups[j].hi};
      out.computed.push_back(Candidate{std::move(term), n, k, p});
    }
  }
  return out;
}

inline void validate_records(const std::vector<SliceRecord>& records, const SliceConfig& config) {
  if (static_cast<std::int64_t>(records.size()) < config.min_support)
    throw DataError("need at least min_support (" + std::to_string(config.min_support) +
                    ") records, got " + std::to_string(records.size()));
  const auto& first = records[0].features;
  for (const auto& rec : records) {
    if (rec.features.size() != first.size())
      throw DataError("records carry inconsistent feature sets");
    auto it = first.begin();
    for (const auto& [name, value] : rec.features) {
      if (name != it->first || value.index() != it->second.index())
        throw DataError("records carry inconsistent feature sets");
      ++it;
    }
  }
}

inline std::optional<double> balanced_accuracy_of(const std::vector<SliceRecord>& records,
                                                  const Slice& slice) {
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> per_class;  // gold -> (n, correct)
  for (const auto& rec : records) {
    if (!slice.matches(rec)) continue;
    if (!rec.gold || !rec.predicted) return std::nullopt;
    auto& c = per_class[*rec.gold];
    ++c.first;
    if (rec.correct) ++c.second;
  }
  if (per_class.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [_, c] : per_class)
    sum += static_cast<double>(c.second) / static_cast<double>(c.first);
  return sum / static_cast<double>(per_class.size());
}

inline void apply_correction(std::vector<Candidate*>& all, std::int64_t M,
                             const SliceConfig& config, std::vector<double>& adjusted,
                             std::vector<bool>& significant) {
  const std::size_t c = all.size();
  adjusted.assign(c, 1.0);
  significant.assign(c, false);
  if (config.correction == Correction::kBonferroni) {
    for (std::size_t i = 0; i < c; ++i) {
      adjusted[i] = std::min(1.0, all[i]->p * static_cast<double>(M));
      significant[i] = adjusted[i] < config.alpha;
    }
    return;
  }
  if (config.correction == Correction::kNone) {
    for (std::size_t i = 0; i < c; ++i) {
      adjusted[i] = all[i]->p;
      significant[i] = adjusted[i] < config.alpha;
    }
    return;
  }
  // Benjamini-Hochberg step-up over the computed candidates. Candidates whose
  // exact p was provably >= alpha were skipped upstream; they can only occupy
  // higher ranks and cannot enter the rejection set, so the decision is
  // unchanged by their absence.
  std::vector<std::size_t> order(c);
  for (std::size_t i = 0; i < c; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return all[a]->p < all[b]->p; });
  double running = 1.0;
  for (std::size_t r = c; r > 0; --r) {
    const std::size_t idx = order[r - 1];
    const double adj = all[idx]->p * static_cast<double>(M) / static_cast<double>(r);
    running = std::min(running, adj);
    adjusted[idx] = std::min(1.0, running);
  }
  for (std::size_t i = 0; i < c; ++i) significant[i] = adjusted[i] < config.alpha;
}

}  // namespace detail

// Weakness search over the raw meta-feature space: categorical values and
// contiguous numeric intervals whose error rate beats the overall rate with
// statistical significance under the hypergeometric model. Interval output is
// pruned to non-overlapping minimal-p ranges per feature.
inline SliceScan find_slices(const std::vector<SliceRecord>& records, const SliceConfig& config) {
  detail::validate_records(records, config);
  const std::int64_t N = static_cast<std::int64_t>(records.size());
  std::int64_t K = 0;
  for (const auto& rec : records)
    if (!rec.correct) ++K;
  SliceScan scan;
  if (K == 0) {
    scan.diagnostics.push_back("no errors in records; nothing to slice");
    return scan;
  }
  const detail::LogFactTable lf(N);
  std::vector<detail::FeatureScan> per_feature;
  std::vector<std::string> names;
  for (const auto& [name, _] : records[0].features) names.push_back(name);
  for (const auto& name : names) {
    auto fs = detail::scan_feature(records, name, N, K, config, lf);
    if (fs.skipped_constant)
      scan.diagnostics.push_back("feature '" + name + "' has all-identical values; skipped");
    scan.candidates_tested += fs.tested;
    per_feature.push_back(std::move(fs));
  }
  std::vector<detail::Candidate*> all;
  for (auto& fs : per_feature)
    for (auto& cand : fs.computed) all.push_back(&cand);
  std::vector<double> adjusted;
  std::vector<bool> significant;
  detail::apply_correction(all, scan.candidates_tested, config, adjusted, significant);

  auto to_slice = [&](const detail::Candidate& cand, double adj, bool sig) {
    Slice s;
    s.terms = {cand.term};
    s.size = cand.n;
    s.errors = cand.k;
    s.accuracy = static_cast<double>(cand.n - cand.k) / static_cast<double>(cand.n);
    s.p_value = cand.p;
    s.adjusted_p = adj;
    s.significant = sig;
    s.balanced_accuracy = detail::balanced_accuracy_of(records, s);
    return s;
  };

  // Track the minimal-p enriched candidate per feature (diagnostic output and
  // the anchor for the brute-force interval oracle).
  for (std::size_t f = 0, base = 0; f < per_feature.size(); ++f) {
    const auto& fs = per_feature[f];
    std::ptrdiff_t best = -1;
    for (std::size_t i = 0; i < fs.computed.size(); ++i)
      if (best < 0 || fs.computed[i].p < fs.computed[static_cast<std::size_t>(best)].p)
        best = static_cast<std::ptrdiff_t>(i);
    if (best >= 0) {
      const std::size_t gi = base + static_cast<std::size_t>(best);
      scan.best_per_feature[names[f]] =
          to_slice(fs.computed[static_cast<std::size_t>(best)], adjusted[gi], significant[gi]);
    }
    base += fs.computed.size();
  }

  // Collect significant candidates; prune numeric intervals to
  // non-overlapping ranges (smallest p wins) per feature.
  std::vector<Slice> result;
  for (std::size_t f = 0, base = 0; f < per_feature.size(); ++f) {
    const auto& fs = per_feature[f];
    std::vector<std::size_t> sig_idx;
    for (std::size_t i = 0; i < fs.computed.size(); ++i)
      if (significant[base + i]) sig_idx.push_back(i);
    const bool numeric = !fs.computed.empty() && fs.computed[0].term.interval.has_value();
    if (numeric) {
      std::sort(sig_idx.begin(), sig_idx.end(), [&](std::size_t a, std::size_t b) {
        const auto& ca = fs.computed[a];
        const auto& cb = fs.computed[b];
        if (ca.p != cb.p) return ca.p < cb.p;
        if (ca.term.interval->first != cb.term.interval->first)
          return ca.term.interval->first < cb.term.interval->first;
        return ca.term.interval->second < cb.term.interval->second;
      });
      std::vector<std::pair<double, double>> accepted;
      for (std::size_t i : sig_idx) {
        const auto& iv = *fs.computed[i].term.interval;
        bool overlaps = false;
        for (const auto& acc : accepted)
          if (iv.first <= acc.second && acc.first <= iv.second) {
            overlaps = true;
            break;
          }
        if (overlaps) continue;
        accepted.push_back(iv);
        result.push_back(to_slice(fs.computed[i], adjusted[base + i], true));
      }
    } else {
      for (std::size_t i : sig_idx)
        result.push_back(to_slice(fs.computed[i], adjusted[base + i], true));
    }
    base += fs.computed.size();
  }
  std::sort(result.begin(), result.end(), [](const Slice& a, const Slice& b) {
    if (a.p_value != b.p_value) return a.p_value < b.p_value;
    return a.label() < b.label();
  });
  scan.slices = std::move(result);
  if (scan.slices.empty())
    scan.diagnostics.push_back("no significant slices (" +
                               std::to_string(scan.candidates_tested) + " candidates tested)");
  return scan;
}

// Two-feature conjunctions built from 1-D components: every categorical value
// with support, and the near-significant or best non-overlapping intervals of
// each numeric feature. A pair is reported only when its p value strictly
// beats both parents.
inline SliceScan find_interaction_slices(const std::vector<SliceRecord>& records,
                                         const SliceConfig& config,
                                         std::int64_t pair_budget = 20000) {
  detail::validate_records(records, config);
  const std::int64_t N = static_cast<std::int64_t>(records.size());
  std::int64_t K = 0;
  for (const auto& rec : records)
    if (!rec.correct) ++K;
  SliceScan scan;
  if (K == 0) {
    scan.diagnostics.push_back("no errors in records; nothing to slice");
    return scan;
  }
  std::vector<std::string> names;
  for (const auto& [name, _] : records[0].features) names.push_back(name);
  if (names.size() < 2) {
    scan.diagnostics.push_back("need at least 2 features for interaction slices");
    return scan;
  }
  const detail::LogFactTable lf(N);
  // 1-D components per feature.
  std::map<std::string, std::vector<detail::Candidate>> components;
  for (const auto& name : names) {
    auto fs = detail::scan_feature(records, name, N, K, config, lf);
    auto& comp = components[name];
    if (fs.computed.empty()) continue;
    const bool numeric = fs.computed[0].term.interval.has_value();
    if (!numeric) {
      comp = std::move(fs.computed);
      continue;
    }
    std::sort(fs.computed.begin(), fs.computed.end(),
              [](const detail::Candidate& a, const detail::Candidate& b) {
                if (a.p != b.p) return a.p < b.p;
                if (a.term.interval->first != b.term.interval->first)
                  return a.term.interval->first < b.term.interval->first;
                return a.term.interval->second < b.term.interval->second;
              });
    std::vector<std::pair<double, double>> accepted;
    for (auto& cand : fs.computed) {
      if (static_cast<int>(comp.size()) >= config.interaction_components) break;
      const bool near = cand.p < config.near_significance_factor * config.alpha;
      if (!comp.empty() && !near) break;  // always keep at least the best interval
      const auto& iv = *cand.term.interval;
      bool overlaps = false;
      for (const auto& acc : accepted)
        if (iv.first <= acc.second && acc.first <= iv.second) {
          overlaps = true;
          break;
        }
      if (overlaps) continue;
      accepted.push_back(iv);
      comp.push_back(cand);
    }
  }
  // Pair candidates.
  struct PairCandidate {
    detail::Candidate cand;
    SliceTerm second_term;
    double parent_p1 = 1.0, parent_p2 = 1.0;
  };
  std::vector<PairCandidate> pairs;
  std::int64_t tested = 0;
  bool budget_hit = false;
  for (std::size_t a = 0; a < names.size() && !budget_hit; ++a) {
    for (std::size_t b = a + 1; b < names.size() && !budget_hit; ++b) {
      for (const auto& c1 : components[names[a]]) {
        for (const auto& c2 : components[names[b]]) {
          if (tested >= pair_budget) {
            budget_hit = true;
            break;
          }
          std::int64_t n = 0, k = 0;
          for (const auto& rec : records) {
            if (!c1.term.matches(rec) || !c2.term.matches(rec)) continue;
            ++n;
            if (!rec.correct) ++k;
          }
          if (n < config.min_support) continue;
          ++tested;
          if (k * N <= K * n) continue;
          PairCandidate pc;
          pc.cand.term = c1.term;
          pc.second_term = c2.term;
          pc.cand.n = n;
          pc.cand.k = k;
          pc.cand.p = hypergeom_tail(N, K, n, k);
          pc.parent_p1 = c1.p;
          pc.parent_p2 = c2.p;
          pairs.push_back(std::move(pc));
        }
        if (budget_hit) break;
      }
    }
  }
  scan.candidates_tested = tested;
  if (budget_hit) scan.diagnostics.push_back("pair budget exhausted; search truncated");
  std::vector<detail::Candidate*> all;
  for (auto& pc : pairs) all.push_back(&pc.cand);
  std::vector<double> adjusted;
  std::vector<bool> significant;
  detail::apply_correction(all, std::max<std::int64_t>(tested, 1), config, adjusted, significant);
  std::vector<Slice> result;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& pc = pairs[i];
    const bool beats_parents = pc.cand.p < pc.parent_p1 && pc.cand.p < pc.parent_p2;
    if (!significant[i] || !beats_parents) continue;
    Slice s;
    s.terms = {pc.cand.term, pc.second_term};
    s.size = pc.cand.n;
    s.errors = pc.cand.k;
    s.accuracy = static_cast<double>(pc.cand.n - pc.cand.k) / static_cast<double>(pc.cand.n);
    s.p_value = pc.cand.p;
    s.adjusted_p = adjusted[i];
    s.significant = true;
    s.balanced_accuracy = detail::balanced_accuracy_of(records, s);
    result.push_back(std::move(s));
  }
  std::sort(result.begin(), result.end(), [](const Slice& a, const Slice& b) {
    if (a.p_value != b.p_value) return a.p_value < b.p_value;
    return a.label() < b.label();
  });
  scan.slices = std::move(result);
  if (scan.slices.empty())
    scan.diagnostics.push_back("no significant interaction slices (" + std::to_string(tested) +
                               " candidates tested)");
  return scan;
}

// ---------------------------------------------------------------------------
// Per-bin accuracy table (the coverage-model view): one row per categorical
// value or per LOW/MED/HIGH bin of a numeric feature with a fitted scheme,
// sorted ascending by accuracy.

struct BinRow {
  std::string label;  // "FEATURE=VALUE"
  std::int64_t size = 0;
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
};

struct BinTable {
  std::vector<BinRow> rows;
  std::vector<std::string> diagnostics;
};

inline BinTable slice_table(const std::vector<SliceRecord>& records,
                            const std::map<std::string, meta::BinScheme>& schemes) {
  if (records.empty()) throw DataError("slice_table: no records");
  for (const auto& rec : records)
    if (!rec.gold || !rec.predicted)
      throw DataError("slice_table records need gold and predicted labels");
  BinTable table;
  struct Agg {
    std::int64_t n = 0;
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> per_class;
  };
  std::map<std::string, Agg> bins;
  for (const auto& [name, value] : records[0].features) {
    const bool numeric = std::holds_alternative<double>(value);
    if (numeric && !schemes.count(name)) {
      table.diagnostics.push_back("feature '" + name + "': no bin scheme; excluded");
      continue;
    }
    for (const auto& rec : records) {
      const auto& fv = rec.features.at(name);
      std::string label;
      if (numeric)
        label = name + "=" + meta::to_string(meta::bin_value(std::get<double>(fv), schemes.at(name)));
      else
        label = name + "=" + std::get<std::string>(fv);
      auto& agg = bins[label];
      ++agg.n;
      auto& cls = agg.per_class[*rec.gold];
      ++cls.first;
      if (rec.correct) ++cls.second;
    }
    if (numeric) {
      for (const char* b : {"LOW_0_25", "MED_25_75", "HIGH_75_100"}) {
        const std::string label = name + "=" + b;
        if (!bins.count(label))
          table.diagnostics.push_back("bin '" + label + "' is empty; omitted");
      }
    }
  }
  for (const auto& [label, agg] : bins) {
    BinRow row;
    row.label = label;
    row.size = agg.n;
    std::int64_t correct = 0;
    double recall_sum = 0.0;
    for (const auto& [_, cls] : agg.per_class) {
      correct += cls.second;
      recall_sum += static_cast<double>(cls.second) / static_cast<double>(cls.first);
    }
    row.accuracy = static_cast<double>(correct) / static_cast<double>(agg.n);
    row.balanced_accuracy = recall_sum / static_cast<double>(agg.per_class.size());
    table.rows.push_back(std::move(row));
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const BinRow& a, const BinRow& b) {
    if (a.accuracy != b.accuracy) return a.accuracy < b.accuracy;
    return a.label < b.label;
  });
  return table;
}

}  // namespace chatcheck::slicer
