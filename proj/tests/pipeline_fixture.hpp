#pragma once

// Deterministic end-to-end fixtures: a text dataset whose intents carry
// distinctive signature words (so the fallback trigram embedder can separate
// them) and conversation logs with controllable intent mix and outcomes.

#include <string>
#include <vector>

#include "json.hpp"

#include "chatcheck/corpus.hpp"
#include "chatcheck/rng.hpp"
#include "testutil.hpp"

namespace pipeline_fixture {

using chatcheck::SplitMix64;

struct IntentTheme {
  std::string name;
  std::vector<std::string> signature;  // words unique to the intent
};

inline std::vector<IntentTheme> make_themes(int count) {
  static const char* stems[] = {
      "card",  "transfer", "balance",  "password", "refund",  "loan",    "vaccine", "symptom",
      "travel", "invoice",  "delivery", "account",  "payment", "billing", "policy",  "branch",
      "mobile", "website",  "statement", "deposit", "credit",  "debit",   "pension", "mortgage",
      "savings", "exchange", "alert",    "limit",   "reward",  "ticket",  "renewal", "upgrade",
      "outage", "coverage", "booking",  "charge",   "dispute", "receipt", "security", "contact",
      "holiday", "interest", "overdraft", "wallet",  "voucher", "cashback", "branching", "portal",
      "enrol",  "kiosk"};
  std::vector<IntentTheme> themes;
  for (int i = 0; i < count; ++i) {
    IntentTheme theme;
    const std::string stem = stems[i % 50];
    theme.name = stem + "_" + std::to_string(i);
    theme.signature = {stem, stem + "ly" + std::to_string(i % 7), "topic" + std::to_string(i)};
    themes.push_back(std::move(theme));
  }
  return themes;
}

inline std::string make_utterance(const IntentTheme& theme, SplitMix64& rng, int variant) {
  static const char* fillers[] = {"please", "help",  "with", "my",    "the",  "now",
                                  "today",  "issue", "need", "about", "check", "status"};
  std::string text;
  const int sig_count = 2 + static_cast<int>(rng.below(2));
  for (int s = 0; s < sig_count; ++s)
    text += (text.empty() ? "" : " ") + theme.signature[static_cast<std::size_t>(rng.below(theme.signature.size()))];
  const int filler_count = 2 + static_cast<int>(rng.below(6));
  for (int f = 0; f < filler_count; ++f)
    text += std::string(" ") + fillers[rng.below(12)];
  // Texture: some contractions, case styles and typos.
  if (variant % 7 == 0) text = "i can't " + text;
  if (variant % 11 == 0) {
    for (auto& c : text) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  } else if (variant % 5 == 0 && text.size() > 4) {
    text[1] = 'q';  // cheap deterministic typo
  }
  return text;
}

inline void write_dataset_jsonl(const std::string& path, int intents, int per_intent,
                                std::uint64_t seed) {
  SplitMix64 rng(seed);
  const auto themes = make_themes(intents);
  std::string out;
  int row = 0;
  for (const auto& theme : themes) {
    for (int i = 0; i < per_intent; ++i) {
      nlohmann::json obj;
      obj["id"] = "u" + std::to_string(row++);
      obj["text"] = make_utterance(theme, rng, i);
      obj["intent"] = theme.name;
      out += obj.dump() + "\n";
    }
  }
  testutil::write_file(path, out);
}

struct LogSpec {
  int conversations = 200;
  double containment = 0.8;
  double off_hours_fraction = 0.2;
  std::vector<std::pair<std::string, double>> intent_weights;  // cumulative draw
  int ood_turns = 0;          // user turns with out-of-vocabulary text
  double start_ts = 1700000000.0;
  std::uint64_t seed = 1;
};

inline void write_logs_jsonl(const std::string& path, const LogSpec& spec,
                             const std::vector<IntentTheme>& themes) {
  SplitMix64 rng(spec.seed);
  double total_weight = 0.0;
  for (const auto& [_, w] : spec.intent_weights) total_weight += w;
  std::string out;
  double ts = spec.start_ts;
  int ood_left = spec.ood_turns;
  for (int i = 0; i < spec.conversations; ++i) {
    double draw = rng.uniform() * total_weight;
    std::string intent = spec.intent_weights.back().first;
    for (const auto& [name, w] : spec.intent_weights) {
      if (draw < w) {
        intent = name;
        break;
      }
      draw -= w;
    }
    const IntentTheme* theme = nullptr;
    for (const auto& t : themes)
      if (t.name == intent) theme = &t;
    SplitMix64 trng(spec.seed * 7919 + static_cast<std::uint64_t>(i));
    std::string text = theme ? make_utterance(*theme, trng, i) : "hello " + intent;
    const bool contained = rng.uniform() < spec.containment;
    nlohmann::json turns = nlohmann::json::array();
    nlohmann::json user;
    user["ts"] = ts;
    user["speaker"] = "user";
    user["text"] = text;
    user["intent"] = intent;
    user["confidence"] = 0.5 + 0.5 * rng.uniform();
    turns.push_back(user);
    nlohmann::json bot;
    bot["ts"] = ts + 1;
    bot["speaker"] = "bot";
    bot["text"] = "let me check that";
    turns.push_back(bot);
    if (ood_left > 0) {
      nlohmann::json ood;
      ood["ts"] = ts + 2;
      ood["speaker"] = "user";
      ood["text"] = "zzqx wubblefroth kryptomax staking yield " + std::to_string(ood_left % 5);
      turns.push_back(ood);
      --ood_left;
    }
    if (!contained) {
      nlohmann::json agent;
      agent["ts"] = ts + 3;
      agent["speaker"] = "agent";
      agent["text"] = "agent taking over";
      turns.push_back(agent);
    }
    nlohmann::json conv;
    conv["conversation_id"] = "conv-" + std::to_string(i);
    conv["outcome"] = contained ? "contained" : "escalated_to_agent";
    conv["business_hours"] = rng.uniform() >= spec.off_hours_fraction;
    conv["turns"] = turns;
    out += conv.dump() + "\n";
    ts += 10.0;
  }
  testutil::write_file(path, out);
}

inline std::string pipeline_config_json(const std::string& dataset, const std::string& baseline_logs,
                                        const std::string& window_logs, const std::string& out_dir,
                                        std::uint64_t seed, std::int64_t drift_min_samples) {
  nlohmann::json cfg;
  cfg["dataset"] = dataset;
  cfg["use_fallback_embedder"] = true;
  cfg["seed"] = seed;
  cfg["out_dir"] = out_dir;
  if (!baseline_logs.empty()) cfg["baseline_logs"] = baseline_logs;
  if (!window_logs.empty()) cfg["window_logs"] = window_logs;
  cfg["split"] = {{"min_class_size", 10}, {"test_fraction", 0.2}};
  cfg["drift"] = {{"alpha", 0.01}, {"min_samples", drift_min_samples}, {"subwindows", 4}};
  cfg["slicer"] = {{"alpha", 0.01}, {"min_support", 20}};
  return cfg.dump(2);
}

}  // namespace pipeline_fixture
