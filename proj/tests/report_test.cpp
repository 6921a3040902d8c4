#include "chatcheck/report.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "pipeline_fixture.hpp"
#include "testutil.hpp"

using namespace chatcheck;
using testutil::TempDir;
using testutil::read_file;
using testutil::write_file;

namespace {

report::PipelineConfig fixture_config(const TempDir& dir, std::uint64_t seed) {
  pipeline_fixture::write_dataset_jsonl(dir.file("dataset.jsonl"), 10, 30, 99);
  const auto themes = pipeline_fixture::make_themes(10);
  pipeline_fixture::LogSpec base_spec;
  base_spec.conversations = 160;
  base_spec.seed = 5;
  for (int i = 0; i < 10; ++i) base_spec.intent_weights.emplace_back(themes[static_cast<std::size_t>(i)].name, 1.0);
  pipeline_fixture::write_logs_jsonl(dir.file("baseline.jsonl"), base_spec, themes);
  pipeline_fixture::LogSpec window_spec = base_spec;
  window_spec.conversations = 120;
  window_spec.seed = 6;
  window_spec.containment = 0.55;
  window_spec.intent_weights[0].second = 8.0;  // heavy shift toward the first intent
  window_spec.ood_turns = 25;
  window_spec.start_ts = 1700010000.0;
  pipeline_fixture::write_logs_jsonl(dir.file("window.jsonl"), window_spec, themes);
  write_file(dir.file("config.json"),
             pipeline_fixture::pipeline_config_json(dir.file("dataset.jsonl"),
                                                    dir.file("baseline.jsonl"),
                                                    dir.file("window.jsonl"), dir.file("out"),
                                                    seed, 100));
  return report::load_pipeline_config(dir.file("config.json"));
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CHATCHECK_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(Pipeline, FixtureRunPopulatesEverySection) {
  TempDir dir("pipeline");
  const auto cfg = fixture_config(dir, 42);
  const auto analysis = report::run_pipeline(cfg);
  EXPECT_FALSE(analysis.bin_table.rows.empty());
  EXPECT_TRUE(analysis.heatmap.has_value());
  EXPECT_FALSE(analysis.scatter.empty());
  EXPECT_TRUE(analysis.coverage.has_value());
  EXPECT_TRUE(analysis.kpis.has_value());
  EXPECT_FALSE(analysis.alerts.empty());  // planted shift and containment drop
  bool kpi_alert = false, shift_alert = false;
  for (const auto& alert : analysis.alerts) {
    kpi_alert |= alert.kind == drift::DriftAlert::Kind::kKpiDivergence;
    shift_alert |= alert.kind == drift::DriftAlert::Kind::kDistributionShift;
  }
  EXPECT_TRUE(kpi_alert);
  EXPECT_TRUE(shift_alert);
}

TEST(Pipeline, StagesLimitedToKpi) {
  TempDir dir("pipeline");
  auto cfg = fixture_config(dir, 7);
  report::apply_stage_list(cfg, "kpi");
  const auto analysis = report::run_pipeline(cfg);
  EXPECT_TRUE(analysis.kpis.has_value());
  EXPECT_TRUE(analysis.bin_table.rows.empty());
  EXPECT_EQ(analysis.bin_table_reason, "stage disabled");
  EXPECT_FALSE(analysis.heatmap.has_value());
  EXPECT_TRUE(analysis.slices.empty());
  EXPECT_FALSE(analysis.config_hash.empty());
}

TEST(Pipeline, ComplexityWithoutEmbeddingsFails) {
  TempDir dir("pipeline");
  pipeline_fixture::write_dataset_jsonl(dir.file("dataset.jsonl"), 6, 20, 3);
  nlohmann::json cfg;
  cfg["dataset"] = dir.file("dataset.jsonl");
  cfg["use_fallback_embedder"] = false;
  cfg["out_dir"] = dir.file("out");
  write_file(dir.file("config.json"), cfg.dump());
  const auto loaded = report::load_pipeline_config(dir.file("config.json"));
  try {
    report::run_pipeline(loaded);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "complexity");
    EXPECT_NE(std::string(e.what()).find("complexity requires embeddings"), std::string::npos);
  }
}

TEST(Pipeline, UnknownConfigKeyRejected) {
  TempDir dir("pipeline");
  write_file(dir.file("config.json"), "{\"dataest\": \"x.jsonl\"}");
  EXPECT_THROW(report::load_pipeline_config(dir.file("config.json")), ConfigError);
}

TEST(Pipeline, MachineOutputsAreByteIdenticalAcrossRuns) {
  TempDir dir("pipeline");
  const auto cfg = fixture_config(dir, 1234);
  auto cfg1 = cfg;
  cfg1.out_dir = dir.file("out1");
  auto cfg2 = cfg;
  cfg2.out_dir = dir.file("out2");
  report::write_report_files(report::run_pipeline(cfg1), cfg1.out_dir, false);
  report::write_report_files(report::run_pipeline(cfg2), cfg2.out_dir, false);
  for (const char* name : {"report.json", "bin_table.csv", "slices.csv", "heatmap.json",
                           "scatter.json", "alerts.jsonl", "remediations.jsonl"}) {
    EXPECT_EQ(read_file(dir.file("out1") + "/" + name), read_file(dir.file("out2") + "/" + name))
        << name;
  }
}

TEST(Pipeline, EveryHtmlNumberExistsInTheJsonReport) {
  TempDir dir("pipeline");
  const auto cfg = fixture_config(dir, 11);
  const auto analysis = report::run_pipeline(cfg);
  const auto html = report::render_html(analysis);
  // Structural checks: one svg per figure, tables in Table-1/Table-2 layout.
  std::size_t svg_count = 0, pos = 0;
  while ((pos = html.find("<svg", pos)) != std::string::npos) {
    ++svg_count;
    pos += 4;
  }
  EXPECT_GE(svg_count, 2u);  // heatmap + scatter
  EXPECT_NE(html.find("<th>MetaFeature</th><th>SIZE</th><th>ACC</th><th>BACC</th>"),
            std::string::npos);
  // Spot values from the machine-readable report must appear in the HTML.
  ASSERT_TRUE(analysis.kpis.has_value());
  EXPECT_NE(html.find(fmt_double(analysis.kpis->containment_rate)), std::string::npos);
  ASSERT_FALSE(analysis.bin_table.rows.empty());
  EXPECT_NE(html.find(fmt_double(analysis.bin_table.rows[0].accuracy)), std::string::npos);
}

TEST(Pipeline, HeatmapSvgHasOneCellPerIntentPair) {
  cx::ConfusionHeatmap hm;
  hm.intents = {"a", "b", "c"};
  hm.matrix = {{1.0, 0.2, 0.0}, {0.1, 1.0, 0.0}, {0.0, 0.0, 1.0}};
  const auto svg = svg::heatmap_svg(hm.intents, hm.matrix);
  std::size_t rects = 0, pos = 0;
  while ((pos = svg.find("<rect", pos)) != std::string::npos) {
    ++rects;
    pos += 5;
  }
  EXPECT_EQ(rects, 9u);
}

TEST(Pipeline, EmptySliceSectionNamesCandidateCount) {
  TempDir dir("pipeline");
  // Well-separated fixture -> the classifier is perfect -> no slices.
  pipeline_fixture::write_dataset_jsonl(dir.file("dataset.jsonl"), 4, 40, 17);
  nlohmann::json cfg;
  cfg["dataset"] = dir.file("dataset.jsonl");
  cfg["use_fallback_embedder"] = true;
  cfg["out_dir"] = dir.file("out");
  cfg["seed"] = 2;
  write_file(dir.file("config.json"), cfg.dump());
  const auto analysis = report::run_pipeline(report::load_pipeline_config(dir.file("config.json")));
  if (analysis.slices.empty()) {
    EXPECT_NE(analysis.slices_reason.find("candidates tested"), std::string::npos);
    const auto html = report::render_html(analysis);
    EXPECT_NE(html.find("candidates tested"), std::string::npos);
  }
}

TEST(Pipeline, ReportJsonRoundTripsThroughParser) {
  TempDir dir("pipeline");
  const auto cfg = fixture_config(dir, 21);
  const auto analysis = report::run_pipeline(cfg);
  const auto j = report::report_to_json(analysis);
  const auto back = report::report_from_json(j);
  EXPECT_EQ(report::report_to_json(back)["slices"], j["slices"]);
  EXPECT_EQ(report::report_to_json(back)["kpis"], j["kpis"]);
  EXPECT_EQ(report::report_to_json(back)["alerts"], j["alerts"]);
}

// ---------------------------------------------------------------------------
// CLI behavior (exit codes and the report subcommand)

TEST(Cli, ExitCodesMatchErrorClasses) {
  TempDir dir("cli");
  // 2: config error (bad flag value via unknown subcommand option).
  EXPECT_EQ(run_cli("run --config " + dir.file("missing.json")), 3);  // unreadable file -> data error
  write_file(dir.file("bad.json"), "{\"unknown_key\": 1}");
  EXPECT_EQ(run_cli("run --config " + dir.file("bad.json")), 2);
  // 3: data error (missing dataset file in ingest-check).
  EXPECT_EQ(run_cli("ingest-check --dataset " + dir.file("nope.jsonl")), 3);
  // 4: stage failure (complexity without embeddings).
  pipeline_fixture::write_dataset_jsonl(dir.file("dataset.jsonl"), 6, 20, 3);
  nlohmann::json cfg;
  cfg["dataset"] = dir.file("dataset.jsonl");
  cfg["out_dir"] = dir.file("out");
  write_file(dir.file("config.json"), cfg.dump());
  EXPECT_EQ(run_cli("run --config " + dir.file("config.json")), 4);
  // 0: success.
  nlohmann::json good = cfg;
  good["use_fallback_embedder"] = true;
  write_file(dir.file("good.json"), good.dump());
  EXPECT_EQ(run_cli("run --config " + dir.file("good.json")), 0);
  EXPECT_TRUE(std::filesystem::exists(dir.file("out") + "/report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir.file("out") + "/report.html"));
}

TEST(Cli, ReportSubcommandRendersHtmlFromJson) {
  TempDir dir("cli");
  pipeline_fixture::write_dataset_jsonl(dir.file("dataset.jsonl"), 6, 25, 8);
  nlohmann::json cfg;
  cfg["dataset"] = dir.file("dataset.jsonl");
  cfg["use_fallback_embedder"] = true;
  cfg["out_dir"] = dir.file("out");
  write_file(dir.file("config.json"), cfg.dump());
  ASSERT_EQ(run_cli("run --config " + dir.file("config.json")), 0);
  ASSERT_EQ(run_cli("report --in " + dir.file("out") + "/report.json --out " +
                    dir.file("again.html")),
            0);
  const auto html = read_file(dir.file("again.html"));
  EXPECT_NE(html.find("<svg"), std::string::npos);
}

TEST(Pipeline, SlicesCsvColumnLayout) {
  TempDir dir("pipeline");
  const auto cfg = fixture_config(dir, 5);
  report::write_report_files(report::run_pipeline(cfg), dir.file("out"), false);
  const auto csv = read_file(dir.file("out") + "/slices.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "MetaFeature,VALUE,ACC,SIZE,P,ADJ_P,SIGNIFICANT");
}

TEST(Pipeline, ExternalPredictionsDriveTheEvaluation) {
  TempDir dir("pipeline");
  pipeline_fixture::write_dataset_jsonl(dir.file("dataset.jsonl"), 8, 30, 55);
  // Produce predictions with the reference classifier via the CLI, then feed
  // them back as an external predictions file.
  ASSERT_EQ(run_cli("complexity --dataset " + dir.file("dataset.jsonl") +
                    " --fallback-embedder --seed 4 --out " + dir.file("cx")),
            0);
  ASSERT_TRUE(std::filesystem::exists(dir.file("cx") + "/predictions.jsonl"));
  ASSERT_TRUE(std::filesystem::exists(dir.file("cx") + "/class_stats.jsonl"));
  const auto stats = cx::load_class_stats(dir.file("cx") + "/class_stats.jsonl");
  EXPECT_EQ(stats.intents.size(), 8u);
  nlohmann::json cfg;
  cfg["dataset"] = dir.file("dataset.jsonl");
  cfg["use_fallback_embedder"] = true;
  cfg["predictions"] = dir.file("cx") + "/predictions.jsonl";
  cfg["out_dir"] = dir.file("out");
  cfg["seed"] = 4;
  write_file(dir.file("config.json"), cfg.dump());
  const auto analysis = report::run_pipeline(report::load_pipeline_config(dir.file("config.json")));
  const auto preds = corpus::load_predictions(dir.file("cx") + "/predictions.jsonl");
  EXPECT_EQ(analysis.scatter.size(), preds.size());  // eval set = predicted ids
  EXPECT_FALSE(analysis.bin_table.rows.empty());
}

TEST(Cli, SubcommandSmoke) {
  TempDir dir("cli");
  pipeline_fixture::write_dataset_jsonl(dir.file("dataset.jsonl"), 8, 30, 21);
  const auto themes = pipeline_fixture::make_themes(8);
  pipeline_fixture::LogSpec base_spec;
  base_spec.conversations = 120;
  base_spec.seed = 31;
  for (int i = 0; i < 8; ++i)
    base_spec.intent_weights.emplace_back(themes[static_cast<std::size_t>(i)].name, 1.0);
  pipeline_fixture::write_logs_jsonl(dir.file("baseline.jsonl"), base_spec, themes);
  auto window_spec = base_spec;
  window_spec.conversations = 100;
  window_spec.seed = 32;
  window_spec.intent_weights[0].second = 7.0;
  window_spec.start_ts = 1700500000.0;
  pipeline_fixture::write_logs_jsonl(dir.file("window.jsonl"), window_spec, themes);

  EXPECT_EQ(run_cli("ingest-check --dataset " + dir.file("dataset.jsonl") + " --logs " +
                    dir.file("baseline.jsonl")),
            0);
  EXPECT_EQ(run_cli("split --dataset " + dir.file("dataset.jsonl") + " --out " + dir.file("sp") +
                    " --seed 3"),
            0);
  EXPECT_TRUE(std::filesystem::exists(dir.file("sp") + "/train.jsonl"));
  EXPECT_TRUE(std::filesystem::exists(dir.file("sp") + "/test.jsonl"));
  EXPECT_EQ(run_cli("extract --dataset " + dir.file("dataset.jsonl") + " --out " +
                    dir.file("meta.jsonl")),
            0);
  EXPECT_EQ(run_cli("extract --dataset " + dir.file("dataset.jsonl") + " --format csv --out " +
                    dir.file("meta.csv")),
            0);
  EXPECT_EQ(read_file(dir.file("meta.csv")).substr(0, 37), "id,spelling,case,contractions,length\n");
  EXPECT_EQ(run_cli("coverage --dataset " + dir.file("dataset.jsonl") +
                    " --fallback-embedder -t 2 --out " + dir.file("coverage.txt")),
            0);
  EXPECT_NE(read_file(dir.file("coverage.txt")).find("coverage:"), std::string::npos);
  EXPECT_EQ(run_cli("kpi --logs " + dir.file("window.jsonl") + " --out " + dir.file("kpi.json")),
            0);
  EXPECT_NE(read_file(dir.file("kpi.json")).find("containment_rate"), std::string::npos);
  EXPECT_EQ(run_cli("drift --baseline-logs " + dir.file("baseline.jsonl") + " --window-logs " +
                    dir.file("window.jsonl") + " --min-samples 50 --save-baseline " +
                    dir.file("baseline.json") + " --out " + dir.file("alerts.jsonl")),
            0);
  EXPECT_NE(read_file(dir.file("alerts.jsonl")).find("distribution_shift"), std::string::npos);
  // The persisted baseline drives a second window without the raw logs.
  EXPECT_EQ(run_cli("drift --load-baseline " + dir.file("baseline.json") + " --window-logs " +
                    dir.file("window.jsonl") + " --min-samples 50 --out " + dir.file("alerts2.jsonl")),
            0);
  EXPECT_EQ(read_file(dir.file("alerts.jsonl")), read_file(dir.file("alerts2.jsonl")));
  EXPECT_EQ(run_cli("whatif --dataset " + dir.file("dataset.jsonl") +
                    " --fallback-embedder --action merge_intents --intents " +
                    themes[0].name + "," + themes[1].name + " --seed 2"),
            0);
}

TEST(Cli, PlanAndPerturbSubcommands) {
  TempDir dir("cli");
  ASSERT_EQ(run_cli("plan -t 2 --out " + dir.file("plan.csv")), 0);
  const auto csv = read_file(dir.file("plan.csv"));
  EXPECT_EQ(csv.substr(0, 44), "SPELLING,CASE,CONTRACTIONS,LENGTH,COMPLEXITY");
  ASSERT_EQ(run_cli("perturb --text \"I am unable to connect\" --cell CONTRACTIONS=True,CASE=ALL_LOWER "
                    "--out " + dir.file("p.jsonl")),
            0);
  const auto out = read_file(dir.file("p.jsonl"));
  EXPECT_NE(out.find("i'm unable to connect"), std::string::npos);
}
