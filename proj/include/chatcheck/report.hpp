#pragma once

#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "chatcheck/common.hpp"
#include "chatcheck/corpus.hpp"
#include "chatcheck/coverage.hpp"
#include "chatcheck/drift_kpi.hpp"
#include "chatcheck/harness.hpp"
#include "chatcheck/metafeatures.hpp"
#include "chatcheck/slicer.hpp"
#include "chatcheck/svg.hpp"

namespace chatcheck::report {

using json = nlohmann::json;

struct StageToggles {
  bool metafeatures = true;
  bool complexity = true;
  bool coverage = true;
  bool slices = true;
  bool drift = true;
  bool kpi = true;
  bool report = true;  // HTML rendering
};

struct PipelineConfig {
  std::optional<std::string> dataset_path;
  corpus::Format dataset_format = corpus::Format::kJsonl;
  std::optional<std::string> embeddings_path;
  corpus::Format embeddings_format = corpus::Format::kJsonl;
  std::optional<std::string> predictions_path;
  std::optional<std::string> dictionary_path;
  bool augment_dictionary_from_data = true;
  bool use_fallback_embedder = false;
  std::size_t fallback_dim = 64;
  std::optional<std::string> baseline_logs_path;
  std::optional<std::string> window_logs_path;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  StageToggles stages;
  corpus::SplitOptions split;
  slicer::SliceConfig slicer_config;
  bool interaction_slices = false;
  double ridge = 1e-3;
  double complexity_cap = 100.0;
  double temperature = 1.0;
  int coverage_strength = 2;
  double drift_alpha = 0.01;
  std::int64_t drift_min_samples = 200;
  int baseline_subwindows = 8;
  drift::NewTopicConfig topics;
  int turn_budget = 6;
  drift::SuggestConfig suggest;
  std::string config_hash;  // filled by load_pipeline_config
};

namespace detail {

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline double get_num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
  return j[key].get<double>();
}

inline bool get_bool(const json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ConfigError(std::string("config key '") + key + "' must be a boolean");
  return j[key].get<bool>();
}

inline std::optional<std::string> get_path(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_string()) throw ConfigError(std::string("config key '") + key + "' must be a string");
  return j[key].get<std::string>();
}

}  // namespace detail

inline PipelineConfig load_pipeline_config(const std::string& path) {
  const std::string bytes = detail::read_file_bytes(path);
  json j = json::parse(bytes, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config file '" + path + "' is not valid JSON");
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  static const std::set<std::string> known = {
      "dataset",     "dataset_format", "embeddings", "embeddings_format", "predictions",
      "dictionary",  "augment_dictionary_from_data", "use_fallback_embedder", "fallback_dim",
      "baseline_logs", "window_logs",  "seed",       "out_dir",           "stages",
      "split",       "slicer",         "complexity", "classifier",        "coverage",
      "drift",       "kpi",            "suggest"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  PipelineConfig c;
  c.config_hash = hex64(fnv1a(bytes));
  c.dataset_path = detail::get_path(j, "dataset");
  if (j.contains("dataset_format"))
    c.dataset_format = corpus::format_from_string(j["dataset_format"].get<std::string>());
  c.embeddings_path = detail::get_path(j, "embeddings");
  if (j.contains("embeddings_format"))
    c.embeddings_format = corpus::format_from_string(j["embeddings_format"].get<std::string>());
  c.predictions_path = detail::get_path(j, "predictions");
  c.dictionary_path = detail::get_path(j, "dictionary");
  c.augment_dictionary_from_data = detail::get_bool(j, "augment_dictionary_from_data", true);
  c.use_fallback_embedder = detail::get_bool(j, "use_fallback_embedder", false);
  c.fallback_dim = static_cast<std::size_t>(detail::get_num(j, "fallback_dim", 64));
  c.baseline_logs_path = detail::get_path(j, "baseline_logs");
  c.window_logs_path = detail::get_path(j, "window_logs");
  c.seed = static_cast<std::uint64_t>(detail::get_num(j, "seed", 0));
  if (auto od = detail::get_path(j, "out_dir")) c.out_dir = *od;
  if (j.contains("stages")) {
    const auto& s = j["stages"];
    c.stages.metafeatures = detail::get_bool(s, "metafeatures", true);
    c.stages.complexity = detail::get_bool(s, "complexity", true);
    c.stages.coverage = detail::get_bool(s, "coverage", true);
    c.stages.slices = detail::get_bool(s, "slices", true);
    c.stages.drift = detail::get_bool(s, "drift", true);
    c.stages.kpi = detail::get_bool(s, "kpi", true);
    c.stages.report = detail::get_bool(s, "report", true);
  }
  if (j.contains("split")) {
    const auto& s = j["split"];
    c.split.min_class_size = static_cast<std::int64_t>(detail::get_num(s, "min_class_size", 10));
    c.split.test_fraction = detail::get_num(s, "test_fraction", 0.2);
  }
  c.split.seed = c.seed;
  if (j.contains("slicer")) {
    const auto& s = j["slicer"];
    c.slicer_config.alpha = detail::get_num(s, "alpha", 0.01);
    c.slicer_config.min_support = static_cast<std::int64_t>(detail::get_num(s, "min_support", 20));
    c.slicer_config.include_confidence_feature = detail::get_bool(s, "include_confidence", true);
    c.interaction_slices = detail::get_bool(s, "interactions", false);
    if (s.contains("correction")) {
      const std::string corr = s["correction"].get<std::string>();
      if (corr == "bonferroni") c.slicer_config.correction = slicer::Correction::kBonferroni;
      else if (corr == "benjamini_hochberg")
        c.slicer_config.correction = slicer::Correction::kBenjaminiHochberg;
      else if (corr == "none") c.slicer_config.correction = slicer::Correction::kNone;
      else throw ConfigError("unknown correction '" + corr + "'");
    }
  }
  if (j.contains("complexity")) {
    const auto& s = j["complexity"];
    c.ridge = detail::get_num(s, "ridge", 1e-3);
    c.complexity_cap = detail::get_num(s, "cap", 100.0);
  }
  if (j.contains("classifier")) c.temperature = detail::get_num(j["classifier"], "temperature", 1.0);
  if (j.contains("coverage"))
    c.coverage_strength = static_cast<int>(detail::get_num(j["coverage"], "t", 2));
  if (j.contains("drift")) {
    const auto& s = j["drift"];
    c.drift_alpha = detail::get_num(s, "alpha", 0.01);
    c.drift_min_samples = static_cast<std::int64_t>(detail::get_num(s, "min_samples", 200));
    c.baseline_subwindows = static_cast<int>(detail::get_num(s, "subwindows", 8));
    c.topics.quantile = detail::get_num(s, "quantile", 0.99);
    c.topics.min_cluster = static_cast<std::int64_t>(detail::get_num(s, "min_cluster", 5));
  }
  if (j.contains("kpi")) c.turn_budget = static_cast<int>(detail::get_num(j["kpi"], "turn_budget", 6));
  if (j.contains("suggest")) {
    const auto& s = j["suggest"];
    c.suggest.merge_threshold = detail::get_num(s, "merge_threshold", 0.3);
    c.suggest.relabel_threshold = detail::get_num(s, "relabel_threshold", 2.0);
    c.suggest.split_min_size = static_cast<std::int64_t>(detail::get_num(s, "split_min_size", 20));
    c.suggest.archive_freq = detail::get_num(s, "archive_freq", 0.005);
    c.suggest.archive_windows = static_cast<int>(detail::get_num(s, "archive_windows", 3));
  }
  return c;
}

// Comma list like "metafeatures,slices,kpi": named stages on, the rest off.
inline void apply_stage_list(PipelineConfig& config, const std::string& list) {
  StageToggles t;
  t.metafeatures = t.complexity = t.coverage = t.slices = t.drift = t.kpi = t.report = false;
  for (const auto& raw : split_on(list, ',')) {
    const auto name = trim(raw);
    if (name == "metafeatures") t.metafeatures = true;
    else if (name == "complexity") t.complexity = true;
    else if (name == "coverage") t.coverage = true;
    else if (name == "slices") t.slices = true;
    else if (name == "drift") t.drift = true;
    else if (name == "kpi") t.kpi = true;
    else if (name == "report") t.report = true;
    else if (!name.empty()) throw ConfigError("unknown stage '" + std::string(name) + "'");
  }
  config.stages = t;
}

// ---------------------------------------------------------------------------
// The machine-readable analysis report. Every section is present; empty
// sections carry an explicit reason.

struct ScatterEntry {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  std::string intent;
  std::optional<double> complexity;
  bool correct = true;
};

struct AnalysisReport {
  std::string tool_version = kVersion;
  std::string config_hash;
  std::map<std::string, std::string> input_digests;
  std::uint64_t seed = 0;
  std::vector<std::string> diagnostics;

  slicer::BinTable bin_table;
  std::string bin_table_reason;

  std::vector<slicer::Slice> slices;
  std::int64_t slice_candidates = 0;
  std::string slices_reason;

  std::optional<cov::CombinatorialModel> coverage_model;
  std::optional<cov::CoverageReport> coverage;
  std::string coverage_reason;

  std::optional<cx::ConfusionHeatmap> heatmap;
  std::string heatmap_reason;

  std::vector<ScatterEntry> scatter;
  std::string scatter_reason;

  std::vector<drift::DriftAlert> alerts;
  std::string alerts_reason;

  std::vector<drift::Remediation> remediations;
  std::string remediations_reason;

  std::optional<drift::KpiReport> kpis;
  std::string kpis_reason;
};

// ---------------------------------------------------------------------------
// JSON serialization (deterministic: object keys are sorted by nlohmann's
// std::map storage and doubles use shortest round-trip form).

namespace detail {

inline json slice_to_json(const slicer::Slice& s) {
  json terms = json::array();
  for (const auto& t : s.terms) {
    json term;
    term["feature"] = t.feature;
    if (t.value) term["value"] = *t.value;
    if (t.interval) {
      term["lo"] = t.interval->first;
      term["hi"] = t.interval->second;
    }
    terms.push_back(std::move(term));
  }
  json out;
  out["metafeature"] = s.label();
  out["terms"] = std::move(terms);
  out["size"] = s.size;
  out["errors"] = s.errors;
  out["acc"] = s.accuracy;
  out["p"] = s.p_value;
  out["adjusted_p"] = s.adjusted_p;
  out["significant"] = s.significant;
  if (s.balanced_accuracy) out["bacc"] = *s.balanced_accuracy;
  return out;
}

inline json alert_to_json(const drift::DriftAlert& a) {
  json out;
  out["kind"] = drift::to_string(a.kind);
  out["statistic"] = a.statistic;
  if (a.p_value) out["p_value"] = *a.p_value;
  if (a.sigma_distance) out["sigma_distance"] = *a.sigma_distance;
  out["window"] = a.window;
  out["affected"] = a.affected;
  out["detail"] = a.detail;
  return out;
}

inline json remediation_to_json(const drift::Remediation& r) {
  json evidence = json::array();
  for (const auto& e : r.evidence) {
    json ev;
    ev["kind"] = e.kind;
    ev["detail"] = e.detail;
    ev["refs"] = e.refs;
    evidence.push_back(std::move(ev));
  }
  json out;
  out["action"] = drift::to_string(r.action);
  out["target_intents"] = r.target_intents;
  out["target_example_ids"] = r.target_example_ids;
  out["evidence"] = std::move(evidence);
  out["rationale"] = r.rationale;
  return out;
}

inline json kpis_to_json(const drift::KpiReport& k) {
  json out;
  out["total_conversations"] = k.total;
  out["containment_rate"] = k.containment_rate;
  out["escalated_rate"] = k.escalated_rate;
  out["abandoned_rate"] = k.abandoned_rate;
  out["off_hours_count"] = k.off_hours_count;
  if (k.off_hours_handled_rate) out["off_hours_handled_rate"] = *k.off_hours_handled_rate;
  if (k.coverage) out["coverage"] = *k.coverage;
  out["mean_turns_to_outcome"] = k.mean_turns_to_outcome;
  if (k.escalation_timeliness) out["escalation_timeliness"] = *k.escalation_timeliness;
  return out;
}

}  // namespace detail

inline json report_to_json(const AnalysisReport& r) {
  json j;
  j["metadata"] = {{"tool_version", r.tool_version},
                   {"config_hash", r.config_hash},
                   {"input_digests", r.input_digests},
                   {"seed", r.seed},
                   {"diagnostics", r.diagnostics}};
  json bin_rows = json::array();
  for (const auto& row : r.bin_table.rows)
    bin_rows.push_back({{"metafeature", row.label},
                        {"size", row.size},
                        {"acc", row.accuracy},
                        {"bacc", row.balanced_accuracy}});
  j["bin_table"] = {{"rows", std::move(bin_rows)},
                    {"diagnostics", r.bin_table.diagnostics},
                    {"empty_reason", r.bin_table_reason}};
  json slice_rows = json::array();
  for (const auto& s : r.slices) slice_rows.push_back(detail::slice_to_json(s));
  j["slices"] = {{"rows", std::move(slice_rows)},
                 {"candidates_tested", r.slice_candidates},
                 {"empty_reason", r.slices_reason}};
  if (r.coverage && r.coverage_model) {
    json uncovered = json::array();
    for (const auto& tup : r.coverage->uncovered) {
      json lits = json::array();
      for (const auto& lit : tup.literals)
        lits.push_back(r.coverage_model->parameters[lit.param].name + "=" +
                       r.coverage_model->parameters[lit.param].values[lit.value]);
      uncovered.push_back(std::move(lits));
    }
    j["coverage"] = {{"covered", r.coverage->covered},
                     {"total", r.coverage->total},
                     {"fraction", r.coverage->fraction()},
                     {"uncovered", std::move(uncovered)},
                     {"empty_reason", r.coverage_reason}};
  } else {
    j["coverage"] = {{"empty_reason", r.coverage_reason}};
  }
  if (r.heatmap) {
    j["heatmap"] = {{"intents", r.heatmap->intents},
                    {"matrix", r.heatmap->matrix},
                    {"empty_reason", r.heatmap_reason}};
  } else {
    j["heatmap"] = {{"empty_reason", r.heatmap_reason}};
  }
  json scatter = json::array();
  for (const auto& p : r.scatter) {
    json point;
    point["id"] = p.id;
    point["x"] = p.x;
    point["y"] = p.y;
    point["intent"] = p.intent;
    point["correct"] = p.correct;
    if (p.complexity) point["complexity"] = *p.complexity;
    scatter.push_back(std::move(point));
  }
  j["scatter"] = {{"points", std::move(scatter)}, {"empty_reason", r.scatter_reason}};
  json alerts = json::array();
  for (const auto& a : r.alerts) alerts.push_back(detail::alert_to_json(a));
  j["alerts"] = {{"rows", std::move(alerts)}, {"empty_reason", r.alerts_reason}};
  json remediations = json::array();
  for (const auto& rem : r.remediations) remediations.push_back(detail::remediation_to_json(rem));
  j["remediations"] = {{"rows", std::move(remediations)}, {"empty_reason", r.remediations_reason}};
  if (r.kpis) {
    j["kpis"] = detail::kpis_to_json(*r.kpis);
    j["kpis"]["empty_reason"] = r.kpis_reason;
  } else {
    j["kpis"] = {{"empty_reason", r.kpis_reason}};
  }
  return j;
}

// Inverse of report_to_json; enough fidelity to re-render HTML from a saved
// report.json.
inline AnalysisReport report_from_json(const json& j) {
  AnalysisReport r;
  const auto& metadata = j.at("metadata");
  r.tool_version = metadata.at("tool_version").get<std::string>();
  r.config_hash = metadata.at("config_hash").get<std::string>();
  r.input_digests = metadata.at("input_digests").get<std::map<std::string, std::string>>();
  r.seed = metadata.at("seed").get<std::uint64_t>();
  r.diagnostics = metadata.at("diagnostics").get<std::vector<std::string>>();
  const auto& bt = j.at("bin_table");
  for (const auto& row : bt.at("rows")) {
    slicer::BinRow br;
    br.label = row.at("metafeature").get<std::string>();
    br.size = row.at("size").get<std::int64_t>();
    br.accuracy = row.at("acc").get<double>();
    br.balanced_accuracy = row.at("bacc").get<double>();
    r.bin_table.rows.push_back(std::move(br));
  }
  r.bin_table.diagnostics = bt.at("diagnostics").get<std::vector<std::string>>();
  r.bin_table_reason = bt.value("empty_reason", std::string());
  const auto& sl = j.at("slices");
  for (const auto& row : sl.at("rows")) {
    slicer::Slice s;
    for (const auto& term : row.at("terms")) {
      slicer::SliceTerm t;
      t.feature = term.at("feature").get<std::string>();
      if (term.contains("value")) t.value = term["value"].get<std::string>();
      if (term.contains("lo")) t.interval = {term["lo"].get<double>(), term["hi"].get<double>()};
      s.terms.push_back(std::move(t));
    }
    s.size = row.at("size").get<std::int64_t>();
    s.errors = row.at("errors").get<std::int64_t>();
    s.accuracy = row.at("acc").get<double>();
    s.p_value = row.at("p").get<double>();
    s.adjusted_p = row.at("adjusted_p").get<double>();
    s.significant = row.at("significant").get<bool>();
    if (row.contains("bacc")) s.balanced_accuracy = row["bacc"].get<double>();
    r.slices.push_back(std::move(s));
  }
  r.slice_candidates = sl.at("candidates_tested").get<std::int64_t>();
  r.slices_reason = sl.value("empty_reason", std::string());
  const auto& covsec = j.at("coverage");
  r.coverage_reason = covsec.value("empty_reason", std::string());
  if (covsec.contains("total")) {
    cov::CoverageReport cr;
    cr.covered = covsec.at("covered").get<std::int64_t>();
    cr.total = covsec.at("total").get<std::int64_t>();
    cr.uncovered.resize(covsec.at("uncovered").size());
    r.coverage = std::move(cr);
  }
  const auto& hm = j.at("heatmap");
  r.heatmap_reason = hm.value("empty_reason", std::string());
  if (hm.contains("intents")) {
    cx::ConfusionHeatmap heat;
    heat.intents = hm.at("intents").get<std::vector<std::string>>();
    heat.matrix = hm.at("matrix").get<std::vector<std::vector<double>>>();
    r.heatmap = std::move(heat);
  }
  const auto& sc = j.at("scatter");
  r.scatter_reason = sc.value("empty_reason", std::string());
  for (const auto& point : sc.at("points")) {
    ScatterEntry p;
    p.id = point.at("id").get<std::string>();
    p.x = point.at("x").get<double>();
    p.y = point.at("y").get<double>();
    p.intent = point.at("intent").get<std::string>();
    p.correct = point.at("correct").get<bool>();
    if (point.contains("complexity")) p.complexity = point["complexity"].get<double>();
    r.scatter.push_back(std::move(p));
  }
  const auto& al = j.at("alerts");
  r.alerts_reason = al.value("empty_reason", std::string());
  for (const auto& row : al.at("rows")) {
    drift::DriftAlert a;
    const std::string kind = row.at("kind").get<std::string>();
    if (kind == "distribution_shift") a.kind = drift::DriftAlert::Kind::kDistributionShift;
    else if (kind == "new_topic_candidate") a.kind = drift::DriftAlert::Kind::kNewTopicCandidate;
    else a.kind = drift::DriftAlert::Kind::kKpiDivergence;
    a.statistic = row.at("statistic").get<double>();
    if (row.contains("p_value")) a.p_value = row["p_value"].get<double>();
    if (row.contains("sigma_distance")) a.sigma_distance = row["sigma_distance"].get<double>();
    a.window = row.value("window", std::string());
    a.affected = row.at("affected").get<std::vector<std::string>>();
    a.detail = row.value("detail", std::string());
    r.alerts.push_back(std::move(a));
  }
  const auto& rm = j.at("remediations");
  r.remediations_reason = rm.value("empty_reason", std::string());
  for (const auto& row : rm.at("rows")) {
    drift::Remediation rem;
    rem.action = drift::remediation_action_from_string(row.at("action").get<std::string>());
    rem.target_intents = row.at("target_intents").get<std::vector<std::string>>();
    rem.target_example_ids = row.at("target_example_ids").get<std::vector<std::string>>();
    for (const auto& ev : row.at("evidence"))
      rem.evidence.push_back({ev.at("kind").get<std::string>(),
                              ev.at("detail").get<std::string>(),
                              ev.at("refs").get<std::vector<std::string>>()});
    rem.rationale = row.value("rationale", std::string());
    r.remediations.push_back(std::move(rem));
  }
  const auto& kp = j.at("kpis");
  r.kpis_reason = kp.value("empty_reason", std::string());
  if (kp.contains("containment_rate")) {
    drift::KpiReport k;
    k.total = kp.at("total_conversations").get<std::int64_t>();
    k.containment_rate = kp.at("containment_rate").get<double>();
    k.escalated_rate = kp.at("escalated_rate").get<double>();
    k.abandoned_rate = kp.at("abandoned_rate").get<double>();
    k.off_hours_count = kp.at("off_hours_count").get<std::int64_t>();
    if (kp.contains("off_hours_handled_rate"))
      k.off_hours_handled_rate = kp["off_hours_handled_rate"].get<double>();
    if (kp.contains("coverage")) k.coverage = kp["coverage"].get<double>();
    k.mean_turns_to_outcome = kp.at("mean_turns_to_outcome").get<double>();
    if (kp.contains("escalation_timeliness"))
      k.escalation_timeliness = kp["escalation_timeliness"].get<double>();
    r.kpis = std::move(k);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Pipeline

inline AnalysisReport run_pipeline(const PipelineConfig& config) {
  AnalysisReport report;
  report.config_hash = config.config_hash;
  report.seed = config.seed;

  auto stage = [](const char* name, auto&& fn) {
    try {
      fn();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  };

  // --- corpus ---------------------------------------------------------------
  std::optional<corpus::Dataset> full, train, test;
  std::vector<corpus::ConversationLog> baseline_logs, window_logs;
  stage("corpus", [&] {
    auto digest = [&](const std::string& name, const std::optional<std::string>& path) {
      if (path) report.input_digests[name] = hex64(fnv1a(detail::read_file_bytes(*path)));
    };
    digest("dataset", config.dataset_path);
    digest("embeddings", config.embeddings_path);
    digest("predictions", config.predictions_path);
    digest("baseline_logs", config.baseline_logs_path);
    digest("window_logs", config.window_logs_path);
    if (config.dataset_path) {
      full = corpus::load_dataset(*config.dataset_path, config.dataset_format);
      if (config.embeddings_path) {
        full = corpus::attach_embeddings(
            *full, corpus::load_embeddings(*config.embeddings_path, config.embeddings_format));
      } else if (config.use_fallback_embedder) {
        full = harness::fallback_embed_dataset(*full, config.fallback_dim);
        report.diagnostics.push_back("embeddings: deterministic fallback embedder (dim " +
                                     std::to_string(config.fallback_dim) + ")");
      }
      if (full->embedded() && !config.predictions_path) {
        auto split = corpus::prepare_split(*full, config.split);
        for (const auto& intent : split.dropped_intents)
          report.diagnostics.push_back("split: dropped intent '" + intent + "' (fewer than " +
                                       std::to_string(config.split.min_class_size) + " examples)");
        train = std::move(split.train);
        test = std::move(split.test);
      }
    }
    if (config.baseline_logs_path) baseline_logs = corpus::load_logs(*config.baseline_logs_path);
    if (config.window_logs_path) window_logs = corpus::load_logs(*config.window_logs_path);
  });

  // Evaluation set: examples covered by external predictions, or the held-out
  // test split (classified by the reference classifier in the complexity
  // stage).
  std::vector<corpus::PredictionRecord> predictions;
  std::vector<const corpus::LabeledExample*> eval;
  stage("corpus", [&] {
    if (config.predictions_path) {
      predictions = corpus::load_predictions(*config.predictions_path);
      if (!full) throw DataError("predictions need the dataset they refer to");
      for (const auto& rec : predictions) {
        const auto* ex = full->find(rec.example_id);
        if (!ex) throw DataError("prediction for unknown id '" + rec.example_id + "'");
        if (ex->intent != rec.gold)
          throw DataError("prediction gold label for id '" + rec.example_id +
                          "' does not match the dataset");
        eval.push_back(ex);
      }
    } else if (test) {
      for (const auto& ex : test->examples) eval.push_back(&ex);
    } else if (full) {
      for (const auto& ex : full->examples) eval.push_back(&ex);
    }
  });

  // --- metafeatures ----------------------------------------------------------
  std::map<std::string, meta::MetaFeatureVector> mfv_by_id;
  std::optional<meta::BinScheme> length_scheme;
  meta::Dictionary dict = config.dictionary_path ? meta::Dictionary::load(*config.dictionary_path)
                                                 : meta::Dictionary::bundled();
  const meta::ContractionLexicon lex = meta::ContractionLexicon::bundled();
  if (config.stages.metafeatures) {
    stage("metafeatures", [&] {
      if (!full) throw DataError("metafeatures requires a dataset");
      if (config.augment_dictionary_from_data) {
        const corpus::Dataset& vocab_source = train ? *train : *full;
        for (const auto& ex : vocab_source.examples) dict.add_text_vocabulary(ex.text);
      }
      std::vector<double> lengths;
      for (const auto* ex : eval) {
        auto mfv = meta::extract(ex->text, dict, lex);
        lengths.push_back(static_cast<double>(mfv.length));
        mfv_by_id[ex->id] = std::move(mfv);
      }
      if (lengths.size() >= 4) length_scheme = meta::fit_bins(lengths);
      else report.diagnostics.push_back("metafeatures: too few examples to fit length bins");
    });
  }

  // --- complexity (fits class stats, classifies the held-out split when no
  // external predictions were supplied, and scores per-utterance h) ----------
  std::optional<cx::ClassStats> stats;
  const corpus::Dataset* stats_source = nullptr;
  std::map<std::string, double> h_by_id;
  std::optional<meta::BinScheme> complexity_scheme;
  std::optional<double> ood_radius;
  std::map<std::string, const corpus::PredictionRecord*> pred_by_id;
  if (config.stages.complexity) {
    stage("complexity", [&] {
      if (!full) throw DataError("complexity requires a dataset");
      if (!full->embedded())
        throw DataError("complexity requires embeddings (supply an embeddings file or enable the fallback embedder)");
      stats_source = config.predictions_path ? &*full : &*train;
      stats = cx::fit_class_stats(*stats_source, config.ridge);
      report.heatmap = cx::confusion_matrix(*stats_source, *stats);
      ood_radius = drift::ood_threshold(*stats_source, *stats, config.topics.quantile);
      if (!config.predictions_path && test) {
        const harness::ReferenceClassifier clf{*stats, config.temperature};
        predictions = harness::classify_dataset(*test, clf);
      }
      for (const auto& rec : predictions) pred_by_id[rec.example_id] = &rec;
      const cx::ComplexityOptions copt{config.complexity_cap};
      std::vector<double> values;
      for (const auto* ex : eval) {
        if (!ex->embedding) continue;
        if (stats->index_of(ex->intent) < 0) continue;  // intent dropped by the split
        const double h = cx::utterance_complexity(*ex->embedding, ex->intent, *stats, copt);
        h_by_id[ex->id] = h;
        values.push_back(h);
        auto mit = mfv_by_id.find(ex->id);
        if (mit != mfv_by_id.end()) mit->second.complexity = h;
      }
      if (values.size() >= 4) complexity_scheme = meta::fit_bins(values);
      else report.diagnostics.push_back("complexity: too few values to fit bins");
      // 2-D scatter over the evaluation set.
      std::vector<std::vector<double>> pts;
      std::vector<const corpus::LabeledExample*> pts_src;
      for (const auto* ex : eval)
        if (ex->embedding) {
          pts.push_back(*ex->embedding);
          pts_src.push_back(ex);
        }
      if (pts.size() >= 2 && pts[0].size() >= 2) {
        const auto xy = cx::project_2d(pts);
        for (std::size_t i = 0; i < pts_src.size(); ++i) {
          ScatterEntry p;
          p.id = pts_src[i]->id;
          p.x = xy[i][0];
          p.y = xy[i][1];
          p.intent = pts_src[i]->intent;
          auto hit = h_by_id.find(p.id);
          if (hit != h_by_id.end()) p.complexity = hit->second;
          auto pit = pred_by_id.find(p.id);
          p.correct = pit == pred_by_id.end() ? true : pit->second->correct;
          report.scatter.push_back(std::move(p));
        }
      } else {
        report.scatter_reason = "not enough embedded examples to project";
      }
    });
  } else {
    report.heatmap_reason = "stage disabled";
    report.scatter_reason = "stage disabled";
    for (const auto& rec : predictions) pred_by_id[rec.example_id] = &rec;
  }

  // --- coverage ---------------------------------------------------------------
  if (config.stages.coverage) {
    stage("coverage", [&] {
      if (!config.stages.metafeatures || mfv_by_id.empty()) {
        report.coverage_reason = "metafeatures unavailable";
        return;
      }
      cov::CombinatorialModel model = cov::default_nlu_model();
      if (!complexity_scheme) {
        cov::CombinatorialModel reduced;
        for (const auto& p : model.parameters)
          if (p.name != "COMPLEXITY") reduced.parameters.push_back(p);
        model = std::move(reduced);
        report.diagnostics.push_back("coverage: COMPLEXITY parameter dropped (no complexity values)");
      }
      std::vector<cov::Row> pool;
      for (const auto* ex : eval) {
        const auto& mfv = mfv_by_id.at(ex->id);
        if (!complexity_scheme || mfv.complexity)
          pool.push_back(cov::nlu_row(mfv, model, length_scheme, complexity_scheme));
      }
      report.coverage_model = model;
      report.coverage = cov::measure_coverage(pool, model, config.coverage_strength);
    });
  } else {
    report.coverage_reason = "stage disabled";
  }

  // --- slices -----------------------------------------------------------------
  std::vector<slicer::SliceRecord> records;
  if (config.stages.slices) {
    stage("slices", [&] {
      if (!config.stages.metafeatures || mfv_by_id.empty()) {
        report.slices_reason = "metafeatures unavailable";
        report.bin_table_reason = report.slices_reason;
        return;
      }
      if (pred_by_id.empty()) {
        report.slices_reason = "no predictions available (supply a predictions file or enable the complexity stage)";
        report.bin_table_reason = report.slices_reason;
        return;
      }
      for (const auto* ex : eval) {
        auto pit = pred_by_id.find(ex->id);
        if (pit == pred_by_id.end()) continue;
        const auto& mfv = mfv_by_id.at(ex->id);
        slicer::SliceRecord rec;
        rec.features["SPELLING"] = std::string(meta::to_string(mfv.spelling));
        rec.features["CASE"] = std::string(meta::to_string(mfv.case_style));
        rec.features["CONTRACTIONS"] = std::string(mfv.contractions ? "True" : "False");
        rec.features["LENGTH"] = static_cast<double>(mfv.length);
        if (complexity_scheme && mfv.complexity) rec.features["COMPLEXITY"] = *mfv.complexity;
        if (config.slicer_config.include_confidence_feature)
          rec.features["CONF"] = pit->second->confidence;
        rec.correct = pit->second->correct;
        rec.gold = pit->second->gold;
        rec.predicted = pit->second->predicted;
        records.push_back(std::move(rec));
      }
      // Records must share one feature set; drop the COMPLEXITY key when any
      // record lacks it.
      bool all_have_complexity = true;
      for (const auto& rec : records)
        if (!rec.features.count("COMPLEXITY")) all_have_complexity = false;
      if (!all_have_complexity)
        for (auto& rec : records) rec.features.erase("COMPLEXITY");
      std::map<std::string, meta::BinScheme> schemes;
      if (length_scheme) schemes["LENGTH"] = *length_scheme;
      if (complexity_scheme && all_have_complexity) schemes["COMPLEXITY"] = *complexity_scheme;
      report.bin_table = slicer::slice_table(records, schemes);
      auto scan = slicer::find_slices(records, config.slicer_config);
      report.slices = scan.slices;
      report.slice_candidates = scan.candidates_tested;
      for (const auto& d : scan.diagnostics) report.diagnostics.push_back("slices: " + d);
      if (config.interaction_slices) {
        auto iscan = slicer::find_interaction_slices(records, config.slicer_config);
        report.slices.insert(report.slices.end(), iscan.slices.begin(), iscan.slices.end());
        report.slice_candidates += iscan.candidates_tested;
      }
      if (report.slices.empty())
        report.slices_reason = "no significant slices (" + std::to_string(report.slice_candidates) +
                               " candidates tested)";
    });
  } else {
    report.slices_reason = "stage disabled";
    report.bin_table_reason = "stage disabled";
  }

  // --- drift -------------------------------------------------------------------
  std::optional<drift::Baseline> baseline;
  std::optional<drift::NewTopicResult> topics;
  std::vector<std::map<std::string, double>> window_freqs;
  if (config.stages.drift) {
    stage("drift", [&] {
      if (baseline_logs.empty() || window_logs.empty()) {
        report.alerts_reason = "drift needs baseline_logs and window_logs";
        return;
      }
      const drift::BaselineConfig bc{config.drift_min_samples, config.baseline_subwindows,
                                     config.turn_budget};
      baseline = drift::build_baseline(baseline_logs, stats, bc);
      auto shift = drift::detect_distribution_drift(*baseline, window_logs, config.drift_alpha,
                                                    config.drift_min_samples);
      if (shift) report.alerts.push_back(std::move(*shift));
      // Out-of-distribution topic candidates over the window's user turns.
      if (stats && config.use_fallback_embedder && ood_radius) {
        std::vector<std::pair<std::string, std::vector<double>>> utterances;
        for (const auto& log : window_logs) {
          std::size_t turn_no = 0;
          for (const auto& t : log.turns) {
            ++turn_no;
            if (t.speaker != corpus::Speaker::kUser || trim(t.text).empty()) continue;
            utterances.emplace_back(log.conversation_id + "#" + std::to_string(turn_no),
                                    harness::fallback_embed(t.text, config.fallback_dim));
          }
        }
        topics = drift::detect_new_topics(utterances, *stats, *ood_radius, config.topics);
        for (auto& alert : drift::new_topic_alerts(*topics)) report.alerts.push_back(std::move(alert));
      } else {
        report.diagnostics.push_back(
            "drift: new-topic detection skipped (needs class stats and the fallback embedder)");
      }
      // Per-sub-window intent frequencies for the archive rule.
      const int sw = std::max(1, config.baseline_subwindows);
      const std::size_t per = std::max<std::size_t>(1, window_logs.size() / static_cast<std::size_t>(sw));
      for (std::size_t lo = 0; lo < window_logs.size(); lo += per) {
        const std::size_t hi = std::min(window_logs.size(), lo + per);
        std::map<std::string, std::int64_t> counts;
        std::int64_t total = 0;
        for (std::size_t i = lo; i < hi; ++i)
          for (const auto& t : window_logs[i].turns)
            if (t.resolved_intent) {
              ++counts[*t.resolved_intent];
              ++total;
            }
        std::map<std::string, double> freqs;
        if (total > 0)
          for (const auto& [intent, c] : counts)
            freqs[intent] = static_cast<double>(c) / static_cast<double>(total);
        window_freqs.push_back(std::move(freqs));
      }
    });
  } else {
    report.alerts_reason = "stage disabled";
  }

  // --- kpi ----------------------------------------------------------------------
  if (config.stages.kpi) {
    stage("kpi", [&] {
      const auto& logs = !window_logs.empty() ? window_logs : baseline_logs;
      if (logs.empty()) {
        report.kpis_reason = "no logs provided";
        return;
      }
      drift::KpiConfig kc{config.turn_budget,
                          topics ? static_cast<std::int64_t>(topics->candidates.size()) : 0};
      report.kpis = drift::compute_kpis(logs, kc);
      if (baseline) {
        std::vector<drift::KpiWindowValue> series;
        const auto n = static_cast<std::int64_t>(logs.size());
        series.push_back({"containment_rate", report.kpis->containment_rate, n, "window"});
        series.push_back({"mean_turns_to_outcome", report.kpis->mean_turns_to_outcome, n, "window"});
        if (report.kpis->escalation_timeliness &&
            baseline->kpi_refs.count("escalation_timeliness"))
          series.push_back(
              {"escalation_timeliness", *report.kpis->escalation_timeliness, n, "window"});
        if (report.kpis->off_hours_handled_rate &&
            baseline->kpi_refs.count("off_hours_handled_rate"))
          series.push_back({"off_hours_handled_rate", *report.kpis->off_hours_handled_rate,
                            report.kpis->off_hours_count, "window"});
        for (auto& alert : drift::kpi_control(series, *baseline))
          report.alerts.push_back(std::move(alert));
      } else {
        report.diagnostics.push_back("kpi: control chart skipped (no baseline)");
      }
    });
  } else {
    report.kpis_reason = "stage disabled";
  }

  // --- remediation suggestions ----------------------------------------------------
  stage("suggest", [&] {
    drift::SuggestConfig sc = config.suggest;
    if (complexity_scheme) sc.complexity_high_cutoff = complexity_scheme->p75;
    if (ood_radius) sc.cluster_radius = *ood_radius;
    drift::SuggestInputs inputs;
    if (report.heatmap) inputs.heatmap = &*report.heatmap;
    if (!report.slices.empty()) inputs.slices = &report.slices;
    if (!records.empty()) inputs.slice_records = &records;
    if (topics) inputs.topics = &*topics;
    if (stats_source) inputs.train = stats_source;
    if (stats) inputs.stats = &*stats;
    if (!window_freqs.empty()) inputs.window_freqs = &window_freqs;
    report.remediations = drift::suggest_remediations(inputs, sc);
    if (report.remediations.empty()) report.remediations_reason = "no issues above thresholds";
  });

  if (report.alerts.empty() && report.alerts_reason.empty())
    report.alerts_reason = "no alerts fired";
  if (report.bin_table.rows.empty() && report.bin_table_reason.empty())
    report.bin_table_reason = "no rows";
  if (report.scatter.empty() && report.scatter_reason.empty())
    report.scatter_reason = "no embedded evaluation examples";
  if (!report.coverage && report.coverage_reason.empty()) report.coverage_reason = "not computed";
  if (!report.kpis && report.kpis_reason.empty()) report.kpis_reason = "not computed";
  if (!report.heatmap && report.heatmap_reason.empty()) report.heatmap_reason = "not computed";
  if (report.slices.empty() && report.slices_reason.empty())
    report.slices_reason = "no significant slices (0 candidates tested)";
  return report;
}

// ---------------------------------------------------------------------------
// File emission

namespace detail {

inline std::string bin_table_csv(const AnalysisReport& r) {
  std::string out = "MetaFeature,SIZE,ACC,BACC\n";
  for (const auto& row : r.bin_table.rows)
    out += corpus::detail::csv_escape(row.label) + "," + std::to_string(row.size) + "," +
           fmt_double(row.accuracy) + "," + fmt_double(row.balanced_accuracy) + "\n";
  return out;
}

inline std::string slices_csv(const AnalysisReport& r) {
  std::string out = "MetaFeature,VALUE,ACC,SIZE,P,ADJ_P,SIGNIFICANT\n";
  for (const auto& s : r.slices) {
    std::string feature, value;
    for (std::size_t i = 0; i < s.terms.size(); ++i) {
      const auto& t = s.terms[i];
      feature += (i ? " & " : "") + t.feature;
      if (t.value) value += (i ? " & " : "") + *t.value;
      else
        value += (i ? " & " : "") + fmt_double(t.interval->first) + "-" +
                 fmt_double(t.interval->second);
    }
    out += corpus::detail::csv_escape(feature) + "," + corpus::detail::csv_escape(value) + "," +
           fmt_double(s.accuracy) + "," + std::to_string(s.size) + "," + fmt_double(s.p_value) +
           "," + fmt_double(s.adjusted_p) + "," + (s.significant ? "true" : "false") + "\n";
  }
  return out;
}

inline std::string jsonl_of(const json& rows) {
  std::string out;
  for (const auto& row : rows) out += row.dump() + "\n";
  return out;
}

}  // namespace detail

inline std::string render_html(const AnalysisReport& r) {
  const json j = report_to_json(r);
  std::string html =
      "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>chatcheck report</title>\n"
      "<style>body{font-family:sans-serif;margin:24px;color:#222}table{border-collapse:collapse;"
      "margin:12px 0}td,th{border:1px solid #bbb;padding:4px 10px;text-align:left}th{background:"
      "#eee}h2{margin-top:32px}.empty{color:#777;font-style:italic}.sig{background:#ffe3e3}"
      "</style></head><body>\n";
  html += "<h1>chatcheck analysis report</h1>\n";
  html += "<p>tool " + svg::escape(r.tool_version) + ", config " + svg::escape(r.config_hash) +
          ", seed " + std::to_string(r.seed) + "</p>\n";

  html += "<h2>KPIs</h2>\n";
  if (r.kpis) {
    html += "<table><tr><th>KPI</th><th>Value</th></tr>";
    const auto& k = *r.kpis;
    auto row = [&](const std::string& name, const std::string& value) {
      html += "<tr><td>" + name + "</td><td>" + value + "</td></tr>";
    };
    row("conversations", std::to_string(k.total));
    row("containment_rate", fmt_double(k.containment_rate));
    row("escalated_rate", fmt_double(k.escalated_rate));
    row("abandoned_rate", fmt_double(k.abandoned_rate));
    row("off_hours_count", std::to_string(k.off_hours_count));
    row("off_hours_handled_rate",
        k.off_hours_handled_rate ? fmt_double(*k.off_hours_handled_rate) : "n/a");
    row("coverage", k.coverage ? fmt_double(*k.coverage) : "n/a");
    row("mean_turns_to_outcome", fmt_double(k.mean_turns_to_outcome));
    row("escalation_timeliness",
        k.escalation_timeliness ? fmt_double(*k.escalation_timeliness) : "n/a");
    html += "</table>\n";
  } else {
    html += "<p class=\"empty\">" + svg::escape(r.kpis_reason) + "</p>\n";
  }

  html += "<h2>Per-bin accuracy</h2>\n";
  if (!r.bin_table.rows.empty()) {
    html += "<table><tr><th>MetaFeature</th><th>SIZE</th><th>ACC</th><th>BACC</th></tr>";
    for (const auto& row : r.bin_table.rows)
      html += "<tr><td>" + svg::escape(row.label) + "</td><td>" + std::to_string(row.size) +
              "</td><td>" + fmt_double(row.accuracy) + "</td><td>" +
              fmt_double(row.balanced_accuracy) + "</td></tr>";
    html += "</table>\n";
  } else {
    html += "<p class=\"empty\">" + svg::escape(r.bin_table_reason) + "</p>\n";
  }

  html += "<h2>Significant slices</h2>\n";
  if (!r.slices.empty()) {
    html += "<table><tr><th>MetaFeature</th><th>VALUE</th><th>ACC</th><th>SIZE</th><th>P</th>"
            "<th>ADJ_P</th></tr>";
    for (const auto& s : r.slices) {
      std::string feature, value;
      for (std::size_t i = 0; i < s.terms.size(); ++i) {
        feature += (i ? " & " : "") + s.terms[i].feature;
        if (s.terms[i].value) value += (i ? " & " : "") + *s.terms[i].value;
        else
          value += (i ? " & " : "") + fmt_double(s.terms[i].interval->first) + "-" +
                   fmt_double(s.terms[i].interval->second);
      }
      html += std::string("<tr") + (s.significant ? " class=\"sig\"" : "") + "><td>" +
              svg::escape(feature) + "</td><td>" + svg::escape(value) + "</td><td>" +
              fmt_double(s.accuracy) + "</td><td>" + std::to_string(s.size) + "</td><td>" +
              fmt_double(s.p_value) + "</td><td>" + fmt_double(s.adjusted_p) + "</td></tr>";
    }
    html += "</table>\n";
  } else {
    html += "<p class=\"empty\">" + svg::escape(r.slices_reason) + "</p>\n";
  }

  html += "<h2>Coverage</h2>\n";
  if (r.coverage) {
    html += "<p>" + std::to_string(r.coverage->covered) + " / " +
            std::to_string(r.coverage->total) + " satisfiable tuples covered (" +
            fmt_double(r.coverage->fraction()) + "); " +
            std::to_string(r.coverage->uncovered.size()) + " uncovered</p>\n";
  } else {
    html += "<p class=\"empty\">" + svg::escape(r.coverage_reason) + "</p>\n";
  }

  html += "<h2>Intent confusion heatmap</h2>\n";
  if (r.heatmap) {
    html += svg::heatmap_svg(r.heatmap->intents, r.heatmap->matrix);
  } else {
    html += "<p class=\"empty\">" + svg::escape(r.heatmap_reason) + "</p>\n";
  }

  html += "<h2>Semantic scatter</h2>\n";
  if (!r.scatter.empty()) {
    std::vector<std::string> intents;
    std::map<std::string, std::size_t> intent_idx;
    for (const auto& p : r.scatter)
      if (!intent_idx.count(p.intent)) {
        intent_idx[p.intent] = intents.size();
        intents.push_back(p.intent);
      }
    std::vector<svg::ScatterPoint> pts;
    for (const auto& p : r.scatter) {
      svg::ScatterPoint sp;
      sp.x = p.x;
      sp.y = p.y;
      sp.intent_index = intent_idx[p.intent];
      sp.correct = p.correct;
      sp.tooltip = p.id + " " + p.intent + (p.complexity ? " h=" + fmt_double(*p.complexity) : "");
      pts.push_back(std::move(sp));
    }
    html += svg::scatter_svg(pts, intents);
  } else {
    html += "<p class=\"empty\">" + svg::escape(r.scatter_reason) + "</p>\n";
  }

  html += "<h2>Alerts</h2>\n";
  if (!r.alerts.empty()) {
    html += "<table><tr><th>Kind</th><th>Window</th><th>Detail</th><th>Affected</th></tr>";
    for (const auto& a : r.alerts) {
      std::string affected;
      for (std::size_t i = 0; i < a.affected.size() && i < 6; ++i)
        affected += (i ? ", " : "") + a.affected[i];
      if (a.affected.size() > 6) affected += ", ...";
      html += std::string("<tr><td>") + drift::to_string(a.kind) + "</td><td>" +
              svg::escape(a.window) + "</td><td>" + svg::escape(a.detail) + "</td><td>" +
              svg::escape(affected) + "</td></tr>";
    }
    html += "</table>\n";
  } else {
    html += "<p class=\"empty\">" + svg::escape(r.alerts_reason) + "</p>\n";
  }

  html += "<h2>Remediation suggestions</h2>\n";
  if (!r.remediations.empty()) {
    html += "<table><tr><th>Action</th><th>Targets</th><th>Rationale</th><th>Evidence</th></tr>";
    for (const auto& rem : r.remediations) {
      std::string targets;
      for (const auto& t : rem.target_intents) targets += t + " ";
      if (!rem.target_example_ids.empty())
        targets += "(" + std::to_string(rem.target_example_ids.size()) + " examples)";
      std::string evidence;
      for (const auto& e : rem.evidence) evidence += e.kind + ": " + e.detail + "; ";
      html += std::string("<tr><td>") + drift::to_string(rem.action) + "</td><td>" +
              svg::escape(targets) + "</td><td>" + svg::escape(rem.rationale) + "</td><td>" +
              svg::escape(evidence) + "</td></tr>";
    }
    html += "</table>\n";
  } else {
    html += "<p class=\"empty\">" + svg::escape(r.remediations_reason) + "</p>\n";
  }

  if (!r.diagnostics.empty()) {
    html += "<h2>Diagnostics</h2>\n<ul>";
    for (const auto& d : r.diagnostics) html += "<li>" + svg::escape(d) + "</li>";
    html += "</ul>\n";
  }

  std::time_t now = std::time(nullptr);
  char tbuf[32];
  std::strftime(tbuf, sizeof(tbuf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  html += std::string("<p class=\"empty\">generated ") + tbuf + "</p>\n";
  html += "</body></html>\n";
  return html;
}

// Writes the machine-readable outputs plus report.html. On failure every
// file written so far is removed so no partial output survives.
inline void write_report_files(const AnalysisReport& r, const std::string& out_dir,
                               bool render_html_file = true) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const json j = report_to_json(r);
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("report.json", j.dump(2) + "\n");
  files.emplace_back("bin_table.csv", detail::bin_table_csv(r));
  files.emplace_back("slices.csv", detail::slices_csv(r));
  files.emplace_back("heatmap.json", j["heatmap"].dump(2) + "\n");
  files.emplace_back("scatter.json", j["scatter"].dump(2) + "\n");
  files.emplace_back("alerts.jsonl", detail::jsonl_of(j["alerts"]["rows"]));
  files.emplace_back("remediations.jsonl", detail::jsonl_of(j["remediations"]["rows"]));
  if (render_html_file) files.emplace_back("report.html", render_html(r));
  std::vector<fs::path> written;
  try {
    for (const auto& [name, content] : files) {
      const fs::path p = fs::path(out_dir) / name;
      std::ofstream out(p, std::ios::binary);
      if (!out) throw DataError("cannot write file '" + p.string() + "'");
      out << content;
      if (!out) throw DataError("write failed for '" + p.string() + "'");
      written.push_back(p);
    }
  } catch (...) {
    for (const auto& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    throw;
  }
}

}  // namespace chatcheck::report
