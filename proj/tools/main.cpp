// chatcheck: quality engineering toolkit for intent-classifier chatbots.
// One subcommand per capability plus `run` for the full pipeline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "chatcheck/common.hpp"
#include "chatcheck/corpus.hpp"
#include "chatcheck/coverage.hpp"
#include "chatcheck/drift_kpi.hpp"
#include "chatcheck/harness.hpp"
#include "chatcheck/lexicons.hpp"
#include "chatcheck/metafeatures.hpp"
#include "chatcheck/report.hpp"
#include "chatcheck/slicer.hpp"

namespace {

using json = nlohmann::json;
using namespace chatcheck;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitStage = 4;

corpus::Format format_of(const std::string& flag, const std::string& path) {
  if (!flag.empty()) return corpus::format_from_string(flag);
  return path.size() > 4 && path.substr(path.size() - 4) == ".csv" ? corpus::Format::kCsv
                                                                   : corpus::Format::kJsonl;
}

void write_text(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file '" + path + "'");
  out << content;
}

meta::Dictionary make_dictionary(const std::string& dictionary_path, bool augment,
                                 const corpus::Dataset* vocab_source) {
  auto dict = dictionary_path.empty() ? meta::Dictionary::bundled()
                                      : meta::Dictionary::load(dictionary_path);
  if (augment && vocab_source)
    for (const auto& ex : vocab_source->examples) dict.add_text_vocabulary(ex.text);
  return dict;
}

std::map<std::string, std::string> parse_cell(const std::string& cell_list) {
  std::map<std::string, std::string> cell;
  for (const auto& part : split_on(cell_list, ',')) {
    const auto t = trim(part);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("cell entry '" + std::string(t) + "' is not NAME=VALUE");
    cell[std::string(trim(t.substr(0, eq)))] = std::string(trim(t.substr(eq + 1)));
  }
  if (cell.empty()) throw ConfigError("empty cell specification");
  return cell;
}

// Shared skeleton for subcommands that are pipeline subsets.
report::PipelineConfig base_pipeline_config(const std::string& dataset,
                                            const std::string& dataset_format,
                                            const std::string& embeddings,
                                            bool fallback_embedder, std::uint64_t seed,
                                            const std::string& out_dir) {
  report::PipelineConfig cfg;
  if (!dataset.empty()) {
    cfg.dataset_path = dataset;
    cfg.dataset_format = format_of(dataset_format, dataset);
  }
  if (!embeddings.empty()) {
    cfg.embeddings_path = embeddings;
    cfg.embeddings_format = format_of("", embeddings);
  }
  cfg.use_fallback_embedder = fallback_embedder;
  cfg.seed = seed;
  cfg.split.seed = seed;
  cfg.out_dir = out_dir;
  cfg.stages.metafeatures = cfg.stages.complexity = cfg.stages.coverage = cfg.stages.slices =
      cfg.stages.drift = cfg.stages.kpi = false;
  cfg.config_hash = hex64(fnv1a(dataset + "|" + embeddings + "|" + std::to_string(seed)));
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quality engineering toolkit for intent-classifier chatbots"};
  app.require_subcommand(1);

  // ---- run -----------------------------------------------------------------
  auto* run = app.add_subcommand("run", "run the full analysis pipeline from a config file");
  std::string run_config, run_out, run_stages;
  std::int64_t run_seed = -1;
  run->add_option("--config", run_config, "pipeline config (JSON)")->required();
  run->add_option("--out", run_out, "output directory override");
  run->add_option("--stages", run_stages, "comma list of stages to run");
  run->add_option("--seed", run_seed, "seed override");

  // ---- ingest-check ----------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest-check", "validate dataset, embedding, prediction and log files");
  std::string ic_dataset, ic_dataset_format, ic_embeddings, ic_predictions, ic_logs;
  ingest->add_option("--dataset", ic_dataset, "dataset file");
  ingest->add_option("--dataset-format", ic_dataset_format, "jsonl or csv");
  ingest->add_option("--embeddings", ic_embeddings, "embedding file");
  ingest->add_option("--predictions", ic_predictions, "predictions jsonl");
  ingest->add_option("--logs", ic_logs, "conversation logs jsonl");

  // ---- split -------------------------------------------------------------------
  auto* split = app.add_subcommand("split", "stratified train/test split with small-class filtering");
  std::string sp_dataset, sp_dataset_format, sp_out = "out";
  double sp_fraction = 0.2;
  std::int64_t sp_min_class = 10;
  std::uint64_t sp_seed = 0;
  split->add_option("--dataset", sp_dataset)->required();
  split->add_option("--dataset-format", sp_dataset_format);
  split->add_option("--out", sp_out, "output directory");
  split->add_option("--test-fraction", sp_fraction);
  split->add_option("--min-class-size", sp_min_class);
  split->add_option("--seed", sp_seed);

  // ---- extract --------------------------------------------------------------------
  auto* extract = app.add_subcommand("extract", "extract natural-language meta-features per utterance");
  std::string ex_dataset, ex_dataset_format, ex_dictionary, ex_contractions, ex_out,
      ex_format = "jsonl";
  bool ex_no_augment = false;
  extract->add_option("--dataset", ex_dataset)->required();
  extract->add_option("--dataset-format", ex_dataset_format);
  extract->add_option("--dictionary", ex_dictionary, "word list override (one word per line)");
  extract->add_option("--contractions", ex_contractions,
                      "contraction lexicon override (surface or surface=expansion per line)");
  extract->add_flag("--no-augment", ex_no_augment, "do not whitelist the dataset vocabulary");
  extract->add_option("--out", ex_out, "output file ('-' for stdout)");
  extract->add_option("--format", ex_format, "jsonl or csv");

  // ---- plan ------------------------------------------------------------------------
  auto* plan = app.add_subcommand("plan", "generate a t-way covering test plan");
  std::string pl_model, pl_out;
  int pl_t = 2;
  std::uint64_t pl_seed = 0;
  plan->add_option("--model", pl_model, "model file (defaults to the NLU template model)");
  plan->add_option("-t,--strength", pl_t);
  plan->add_option("--seed", pl_seed);
  plan->add_option("--out", pl_out, "plan csv ('-' for stdout)");

  // ---- coverage ----------------------------------------------------------------------
  auto* coverage = app.add_subcommand("coverage", "measure t-way coverage of a dataset's meta-features");
  std::string cv_dataset, cv_dataset_format, cv_embeddings, cv_dictionary, cv_out;
  bool cv_fallback = false;
  int cv_t = 2;
  std::uint64_t cv_seed = 0;
  coverage->add_option("--dataset", cv_dataset)->required();
  coverage->add_option("--dataset-format", cv_dataset_format);
  coverage->add_option("--embeddings", cv_embeddings);
  coverage->add_flag("--fallback-embedder", cv_fallback);
  coverage->add_option("--dictionary", cv_dictionary);
  coverage->add_option("-t,--strength", cv_t);
  coverage->add_option("--seed", cv_seed);
  coverage->add_option("--out", cv_out, "coverage report ('-' for stdout)");

  // ---- perturb ---------------------------------------------------------------------
  auto* perturb = app.add_subcommand("perturb", "transform utterances into a requested meta-feature cell");
  std::string pb_text, pb_dataset, pb_dataset_format, pb_cell, pb_dictionary, pb_contractions,
      pb_out;
  std::uint64_t pb_seed = 0;
  perturb->add_option("--text", pb_text, "single utterance");
  perturb->add_option("--dataset", pb_dataset, "perturb every utterance of a dataset");
  perturb->add_option("--dataset-format", pb_dataset_format);
  perturb->add_option("--cell", pb_cell, "e.g. SPELLING=SINGLE_ERROR,CASE=ALL_LOWER")->required();
  perturb->add_option("--dictionary", pb_dictionary);
  perturb->add_option("--contractions", pb_contractions, "contraction lexicon override");
  perturb->add_option("--seed", pb_seed);
  perturb->add_option("--out", pb_out, "output jsonl ('-' for stdout)");

  // ---- complexity ---------------------------------------------------------------------
  auto* complexity = app.add_subcommand("complexity", "confusability scores, heatmap and 2-D scatter");
  std::string cx_dataset, cx_dataset_format, cx_embeddings, cx_out = "out";
  bool cx_fallback = false;
  std::uint64_t cx_seed = 0;
  double cx_ridge = 1e-3;
  complexity->add_option("--dataset", cx_dataset)->required();
  complexity->add_option("--dataset-format", cx_dataset_format);
  complexity->add_option("--embeddings", cx_embeddings);
  complexity->add_flag("--fallback-embedder", cx_fallback);
  complexity->add_option("--seed", cx_seed);
  complexity->add_option("--ridge", cx_ridge);
  complexity->add_option("--out", cx_out, "output directory");

  // ---- slices ----------------------------------------------------------------------------
  auto* slices = app.add_subcommand("slices", "weakness slices over meta-features");
  std::string sl_dataset, sl_dataset_format, sl_embeddings, sl_predictions, sl_out = "out";
  bool sl_fallback = false, sl_interactions = false;
  double sl_alpha = 0.01;
  std::int64_t sl_min_support = 20;
  std::uint64_t sl_seed = 0;
  slices->add_option("--dataset", sl_dataset)->required();
  slices->add_option("--dataset-format", sl_dataset_format);
  slices->add_option("--embeddings", sl_embeddings);
  slices->add_flag("--fallback-embedder", sl_fallback);
  slices->add_option("--predictions", sl_predictions, "external predictions jsonl");
  slices->add_option("--alpha", sl_alpha);
  slices->add_option("--min-support", sl_min_support);
  slices->add_flag("--interactions", sl_interactions, "also search 2-feature conjunctions");
  slices->add_option("--seed", sl_seed);
  slices->add_option("--out", sl_out, "output directory");

  // ---- drift ------------------------------------------------------------------------------
  auto* driftcmd = app.add_subcommand("drift", "intent-distribution drift detection from logs");
  std::string dr_baseline, dr_window, dr_out, dr_save_baseline, dr_load_baseline;
  double dr_alpha = 0.01;
  std::int64_t dr_min_samples = 200;
  driftcmd->add_option("--baseline-logs", dr_baseline, "verified logs to build the baseline from");
  driftcmd->add_option("--load-baseline", dr_load_baseline, "reuse a persisted baseline file");
  driftcmd->add_option("--window-logs", dr_window)->required();
  driftcmd->add_option("--alpha", dr_alpha);
  driftcmd->add_option("--min-samples", dr_min_samples);
  driftcmd->add_option("--save-baseline", dr_save_baseline, "persist the baseline for later windows");
  driftcmd->add_option("--out", dr_out, "alerts jsonl ('-' for stdout)");

  // ---- kpi --------------------------------------------------------------------------------
  auto* kpi = app.add_subcommand("kpi", "business KPIs from conversation logs");
  std::string kp_logs, kp_out;
  int kp_turn_budget = 6;
  kpi->add_option("--logs", kp_logs)->required();
  kpi->add_option("--turn-budget", kp_turn_budget);
  kpi->add_option("--out", kp_out, "kpis json ('-' for stdout)");

  // ---- whatif ------------------------------------------------------------------------------
  auto* whatif = app.add_subcommand("whatif", "impact analysis of a remediation on a copy of the data");
  std::string wi_dataset, wi_dataset_format, wi_embeddings, wi_action, wi_intents, wi_ids;
  bool wi_fallback = false;
  std::uint64_t wi_seed = 0;
  double wi_fraction = 0.2;
  std::int64_t wi_min_class = 10;
  whatif->add_option("--dataset", wi_dataset)->required();
  whatif->add_option("--dataset-format", wi_dataset_format);
  whatif->add_option("--embeddings", wi_embeddings);
  whatif->add_flag("--fallback-embedder", wi_fallback);
  whatif->add_option("--action", wi_action, "merge_intents | split_intent | relabel | remove_samples | archive_intent")->required();
  whatif->add_option("--intents", wi_intents, "comma list of target intents");
  whatif->add_option("--ids", wi_ids, "comma list of target example ids");
  whatif->add_option("--seed", wi_seed);
  whatif->add_option("--test-fraction", wi_fraction);
  whatif->add_option("--min-class-size", wi_min_class);

  // ---- report ---------------------------------------------------------------------------------
  auto* reportcmd = app.add_subcommand("report", "render report.html from a saved report.json");
  std::string rp_in, rp_out = "report.html";
  reportcmd->add_option("--in", rp_in, "report.json")->required();
  reportcmd->add_option("--out", rp_out, "output html file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      auto cfg = report::load_pipeline_config(run_config);
      if (!run_out.empty()) cfg.out_dir = run_out;
      if (!run_stages.empty()) report::apply_stage_list(cfg, run_stages);
      if (run_seed >= 0) {
        cfg.seed = static_cast<std::uint64_t>(run_seed);
        cfg.split.seed = cfg.seed;
      }
      const auto analysis = report::run_pipeline(cfg);
      report::write_report_files(analysis, cfg.out_dir, cfg.stages.report);
      std::cout << "report written to " << cfg.out_dir << "\n";
      return kExitOk;
    }

    if (*ingest) {
      if (ic_dataset.empty() && ic_logs.empty() && ic_predictions.empty())
        throw ConfigError("nothing to check; pass --dataset, --predictions or --logs");
      std::optional<corpus::Dataset> ds;
      if (!ic_dataset.empty()) {
        ds = corpus::load_dataset(ic_dataset, format_of(ic_dataset_format, ic_dataset));
        std::cout << "dataset: " << ds->size() << " examples, " << ds->intent_index.size()
                  << " intents" << (ds->embedded() ? ", embedded dim " +
                                                         std::to_string(*ds->embedding_dim)
                                                   : "")
                  << "\n";
      }
      if (!ic_embeddings.empty()) {
        auto vectors = corpus::load_embeddings(ic_embeddings, format_of("", ic_embeddings));
        std::cout << "embeddings: " << vectors.size() << " vectors\n";
        if (ds) {
          ds = corpus::attach_embeddings(*ds, vectors);
          std::cout << "embeddings attach cleanly (dim " << *ds->embedding_dim << ")\n";
        }
      }
      if (!ic_predictions.empty()) {
        const auto preds = corpus::load_predictions(ic_predictions);
        std::cout << "predictions: " << preds.size() << " records\n";
        if (ds)
          for (const auto& rec : preds)
            if (!ds->find(rec.example_id))
              throw DataError("prediction for unknown id '" + rec.example_id + "'");
      }
      if (!ic_logs.empty()) {
        const auto logs = corpus::load_logs(ic_logs);
        std::cout << "logs: " << logs.size() << " conversations\n";
      }
      std::cout << "ok\n";
      return kExitOk;
    }

    if (*split) {
      const auto ds = corpus::load_dataset(sp_dataset, format_of(sp_dataset_format, sp_dataset));
      const auto result =
          corpus::prepare_split(ds, corpus::SplitOptions{sp_min_class, sp_fraction, sp_seed});
      std::filesystem::create_directories(sp_out);
      corpus::write_dataset(result.train, sp_out + "/train.jsonl");
      corpus::write_dataset(result.test, sp_out + "/test.jsonl");
      std::cout << "train " << result.train.size() << " / test " << result.test.size() << "\n";
      for (const auto& intent : result.dropped_intents)
        std::cout << "dropped intent: " << intent << "\n";
      return kExitOk;
    }

    if (*extract) {
      const auto ds = corpus::load_dataset(ex_dataset, format_of(ex_dataset_format, ex_dataset));
      const auto dict = make_dictionary(ex_dictionary, !ex_no_augment, &ds);
      const auto lex = ex_contractions.empty() ? meta::ContractionLexicon::bundled()
                                               : meta::ContractionLexicon::load(ex_contractions);
      std::string out;
      const bool csv = ex_format == "csv";
      if (csv) out = "id,spelling,case,contractions,length\n";
      for (const auto& ex : ds.examples) {
        const auto mfv = meta::extract(ex.text, dict, lex);
        if (csv) {
          out += corpus::detail::csv_escape(ex.id) + "," + meta::to_string(mfv.spelling) + "," +
                 meta::to_string(mfv.case_style) + "," + (mfv.contractions ? "True" : "False") +
                 "," + std::to_string(mfv.length) + "\n";
        } else {
          json row;
          row["id"] = ex.id;
          row["spelling"] = meta::to_string(mfv.spelling);
          row["case"] = meta::to_string(mfv.case_style);
          row["contractions"] = mfv.contractions;
          row["length"] = mfv.length;
          out += row.dump() + "\n";
        }
      }
      write_text(ex_out, out);
      return kExitOk;
    }

    if (*plan) {
      const auto model = pl_model.empty() ? cov::default_nlu_model() : cov::load_model(pl_model);
      const auto test_plan = cov::generate_plan(model, pl_t, pl_seed);
      write_text(pl_out, cov::plan_to_csv(model, test_plan));
      std::cerr << test_plan.rows.size() << " rows\n";
      return kExitOk;
    }

    if (*coverage) {
      auto cfg = base_pipeline_config(cv_dataset, cv_dataset_format, cv_embeddings, cv_fallback,
                                      cv_seed, "");
      cfg.stages.metafeatures = true;
      cfg.stages.complexity = !cv_embeddings.empty() || cv_fallback;
      cfg.stages.coverage = true;
      cfg.coverage_strength = cv_t;
      if (!cv_dictionary.empty()) cfg.dictionary_path = cv_dictionary;
      const auto analysis = report::run_pipeline(cfg);
      if (!analysis.coverage) throw StageError("coverage", analysis.coverage_reason);
      write_text(cv_out, cov::coverage_report_to_text(*analysis.coverage_model,
                                                      *analysis.coverage, cv_t));
      return kExitOk;
    }

    if (*perturb) {
      if (pb_text.empty() == pb_dataset.empty())
        throw ConfigError("pass exactly one of --text or --dataset");
      cov::PerturbationSpec spec;
      spec.cell = parse_cell(pb_cell);
      spec.rng_seed = pb_seed;
      std::vector<std::pair<std::string, std::string>> inputs;  // id, text
      std::optional<corpus::Dataset> ds;
      if (!pb_dataset.empty()) {
        ds = corpus::load_dataset(pb_dataset, format_of(pb_dataset_format, pb_dataset));
        for (const auto& ex : ds->examples) inputs.emplace_back(ex.id, ex.text);
      } else {
        inputs.emplace_back("0", pb_text);
      }
      const auto dict = make_dictionary(pb_dictionary, true, ds ? &*ds : nullptr);
      const auto lex = pb_contractions.empty() ? meta::ContractionLexicon::bundled()
                                               : meta::ContractionLexicon::load(pb_contractions);
      if (spec.cell.count("LENGTH")) {
        std::vector<double> lengths;
        for (const auto& [_, text] : inputs)
          lengths.push_back(static_cast<double>(split_ws(text).size()));
        if (lengths.size() < 4)
          throw ConfigError("LENGTH targets need at least 4 utterances to fit bins");
        spec.length_scheme = meta::fit_bins(lengths);
      }
      std::string out;
      for (const auto& [id, text] : inputs) {
        json row;
        row["id"] = id;
        row["text"] = text;
        try {
          const auto result = cov::perturb(text, spec, dict, lex);
          row["perturbed"] = result.text;
          row["transforms"] = result.transforms;
        } catch (const DataError& e) {
          row["error"] = e.what();
        }
        out += row.dump() + "\n";
      }
      write_text(pb_out, out);
      return kExitOk;
    }

    if (*complexity) {
      auto ds = corpus::load_dataset(cx_dataset, format_of(cx_dataset_format, cx_dataset));
      if (!cx_embeddings.empty())
        ds = corpus::attach_embeddings(
            ds, corpus::load_embeddings(cx_embeddings, format_of("", cx_embeddings)));
      else if (cx_fallback)
        ds = harness::fallback_embed_dataset(ds);
      else
        throw ConfigError("complexity needs --embeddings or --fallback-embedder");
      const auto split_result =
          corpus::prepare_split(ds, corpus::SplitOptions{10, 0.2, cx_seed});
      const auto stats = cx::fit_class_stats(split_result.train, cx_ridge);
      const harness::ReferenceClassifier clf{stats, 1.0};
      const auto predictions = harness::classify_dataset(split_result.test, clf);
      std::filesystem::create_directories(cx_out);
      cx::save_class_stats(stats, cx_out + "/class_stats.jsonl");
      corpus::write_predictions(predictions, cx_out + "/predictions.jsonl");
      std::string complexity_rows;
      for (const auto& ex : split_result.test.examples) {
        const auto detail = cx::utterance_complexity_detail(*ex.embedding, ex.intent, stats);
        json row;
        row["id"] = ex.id;
        row["gold"] = ex.intent;
        row["h"] = detail.h;
        row["nearest_other"] = detail.nearest_other;
        complexity_rows += row.dump() + "\n";
      }
      write_text(cx_out + "/complexity.jsonl", complexity_rows);
      const auto heatmap = cx::confusion_matrix(split_result.train, stats);
      json hm;
      hm["intents"] = heatmap.intents;
      hm["matrix"] = heatmap.matrix;
      write_text(cx_out + "/heatmap.json", hm.dump(2) + "\n");
      std::vector<std::vector<double>> points;
      for (const auto& ex : split_result.test.examples) points.push_back(*ex.embedding);
      json scatter = json::array();
      if (points.size() >= 2 && points[0].size() >= 2) {
        const auto xy = cx::project_2d(points);
        for (std::size_t i = 0; i < points.size(); ++i) {
          json p;
          p["id"] = split_result.test.examples[i].id;
          p["x"] = xy[i][0];
          p["y"] = xy[i][1];
          p["intent"] = split_result.test.examples[i].intent;
          scatter.push_back(std::move(p));
        }
      }
      write_text(cx_out + "/scatter.json", scatter.dump(2) + "\n");
      std::cout << "complexity outputs written to " << cx_out << "\n";
      return kExitOk;
    }

    if (*slices) {
      auto cfg = base_pipeline_config(sl_dataset, sl_dataset_format, sl_embeddings, sl_fallback,
                                      sl_seed, sl_out);
      cfg.stages.metafeatures = true;
      cfg.stages.complexity = !sl_embeddings.empty() || sl_fallback;
      cfg.stages.slices = true;
      if (!sl_predictions.empty()) cfg.predictions_path = sl_predictions;
      cfg.slicer_config.alpha = sl_alpha;
      cfg.slicer_config.min_support = sl_min_support;
      cfg.interaction_slices = sl_interactions;
      const auto analysis = report::run_pipeline(cfg);
      report::write_report_files(analysis, sl_out, false);
      std::cout << analysis.slices.size() << " significant slices ("
                << analysis.slice_candidates << " candidates tested); outputs in " << sl_out
                << "\n";
      return kExitOk;
    }

    if (*driftcmd) {
      if (dr_baseline.empty() == dr_load_baseline.empty())
        throw ConfigError("pass exactly one of --baseline-logs or --load-baseline");
      const auto window_logs = corpus::load_logs(dr_window);
      const auto baseline =
          dr_load_baseline.empty()
              ? drift::build_baseline(corpus::load_logs(dr_baseline), std::nullopt,
                                      drift::BaselineConfig{dr_min_samples, 8, 6})
              : drift::load_baseline(dr_load_baseline);
      if (!dr_save_baseline.empty()) drift::save_baseline(baseline, dr_save_baseline);
      std::string out;
      if (auto alert =
              drift::detect_distribution_drift(baseline, window_logs, dr_alpha, dr_min_samples))
        out += report::detail::alert_to_json(*alert).dump() + "\n";
      write_text(dr_out, out);
      std::cerr << (out.empty() ? "no drift detected" : "drift alert emitted") << "\n";
      return kExitOk;
    }

    if (*kpi) {
      const auto logs = corpus::load_logs(kp_logs);
      const auto kpis = drift::compute_kpis(logs, drift::KpiConfig{kp_turn_budget, 0});
      write_text(kp_out, report::detail::kpis_to_json(kpis).dump(2) + "\n");
      return kExitOk;
    }

    if (*whatif) {
      auto ds = corpus::load_dataset(wi_dataset, format_of(wi_dataset_format, wi_dataset));
      if (!wi_embeddings.empty())
        ds = corpus::attach_embeddings(ds,
                                       corpus::load_embeddings(wi_embeddings, format_of("", wi_embeddings)));
      else if (wi_fallback)
        ds = harness::fallback_embed_dataset(ds);
      else
        throw ConfigError("whatif needs --embeddings or --fallback-embedder");
      const auto split_result =
          corpus::prepare_split(ds, corpus::SplitOptions{wi_min_class, wi_fraction, wi_seed});
      drift::Remediation remediation;
      remediation.action = drift::remediation_action_from_string(wi_action);
      for (const auto& intent : split_on(wi_intents, ','))
        if (!trim(intent).empty()) remediation.target_intents.emplace_back(trim(intent));
      for (const auto& id : split_on(wi_ids, ','))
        if (!trim(id).empty()) remediation.target_example_ids.emplace_back(trim(id));
      const auto result =
          drift::impact_whatif(split_result.train, split_result.test, remediation);
      json out;
      out["before"] = {{"accuracy", result.before.accuracy},
                       {"balanced_accuracy", result.before.balanced_accuracy}};
      out["after"] = {{"accuracy", result.after.accuracy},
                      {"balanced_accuracy", result.after.balanced_accuracy}};
      out["delta"] = {{"accuracy", result.accuracy_delta},
                      {"balanced_accuracy", result.balanced_accuracy_delta}};
      std::cout << out.dump(2) << "\n";
      return kExitOk;
    }

    if (*reportcmd) {
      std::ifstream in(rp_in);
      if (!in) throw DataError("cannot open '" + rp_in + "'");
      json j = json::parse(in, nullptr, false);
      if (j.is_discarded()) throw DataError("'" + rp_in + "' is not valid JSON");
      const auto analysis = report::report_from_json(j);
      write_text(rp_out, report::render_html(analysis));
      return kExitOk;
    }
  } catch (const StageError& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return kExitStage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
