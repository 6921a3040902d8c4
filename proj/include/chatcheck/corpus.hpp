#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "chatcheck/common.hpp"
#include "chatcheck/rng.hpp"

namespace chatcheck::corpus {

using json = nlohmann::json;

struct LabeledExample {
  std::string id;
  std::string text;
  std::string intent;
  std::optional<std::vector<double>> embedding;
};

// Immutable after construction; build with from_examples so the index and
// invariants (non-empty text/intent, unique ids, consistent embedding
// dimension) are always in force.
struct Dataset {
  std::vector<LabeledExample> examples;
  std::map<std::string, std::vector<std::size_t>> intent_index;  // intent -> indices
  std::map<std::string, std::size_t> id_index;                   // id -> index
  std::optional<std::size_t> embedding_dim;

  static Dataset from_examples(std::vector<LabeledExample> rows) {
    if (rows.empty()) throw DataError("empty dataset");
    Dataset ds;
    ds.examples = std::move(rows);
    std::optional<std::size_t> dim;
    for (std::size_t i = 0; i < ds.examples.size(); ++i) {
      auto& ex = ds.examples[i];
      if (ex.id.empty()) ex.id = std::to_string(i);
      if (trim(ex.text).empty())
        throw DataError("row " + std::to_string(i + 1) + ": empty text");
      if (ex.intent.empty())
        throw DataError("row " + std::to_string(i + 1) + ": empty intent");
      if (!ds.id_index.emplace(ex.id, i).second)
        throw DataError("duplicate id '" + ex.id + "' at row " + std::to_string(i + 1));
      if (ex.embedding) {
        if (dim && ex.embedding->size() != *dim)
          throw DataError("row " + std::to_string(i + 1) + ": embedding dimension " +
                          std::to_string(ex.embedding->size()) + " does not match dataset dimension " +
                          std::to_string(*dim));
        dim = ex.embedding->size();
        if (*dim == 0) throw DataError("row " + std::to_string(i + 1) + ": zero-dimensional embedding");
      }
      ds.intent_index[ex.intent].push_back(i);
    }
    bool all_embedded = true;
    for (const auto& ex : ds.examples)
      if (!ex.embedding) all_embedded = false;
    if (all_embedded) ds.embedding_dim = dim;
    return ds;
  }

  const LabeledExample* find(const std::string& id) const {
    auto it = id_index.find(id);
    return it == id_index.end() ? nullptr : &examples[it->second];
  }

  std::size_t size() const { return examples.size(); }
  bool embedded() const { return embedding_dim.has_value(); }
};

struct PredictionRecord {
  std::string example_id;
  std::string gold;
  std::string predicted;
  double confidence = 0.0;
  bool correct = false;  // always gold == predicted
};

enum class Speaker { kUser, kBot, kAgent };
enum class Outcome { kContained, kEscalated, kAbandoned };

inline const char* to_string(Speaker s) {
  switch (s) {
    case Speaker::kUser: return "user";
    case Speaker::kBot: return "bot";
    case Speaker::kAgent: return "agent";
  }
  return "user";
}

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::kContained: return "contained";
    case Outcome::kEscalated: return "escalated_to_agent";
    case Outcome::kAbandoned: return "abandoned";
  }
  return "contained";
}

inline Speaker speaker_from_string(const std::string& s) {
  if (s == "user") return Speaker::kUser;
  if (s == "bot") return Speaker::kBot;
  if (s == "agent") return Speaker::kAgent;
  throw DataError("unknown speaker '" + s + "'");
}

inline Outcome outcome_from_string(const std::string& s) {
  if (s == "contained") return Outcome::kContained;
  if (s == "escalated_to_agent") return Outcome::kEscalated;
  if (s == "abandoned") return Outcome::kAbandoned;
  throw DataError("unknown outcome '" + s + "'");
}

struct Turn {
  double ts = 0.0;  // epoch seconds
  Speaker speaker = Speaker::kUser;
  std::string text;
  std::optional<std::string> resolved_intent;
  std::optional<double> confidence;
};

struct ConversationLog {
  std::string conversation_id;
  std::vector<Turn> turns;
  Outcome outcome = Outcome::kContained;
  bool business_hours = true;

  double start_ts() const {
    return turns.empty() ? std::numeric_limits<double>::infinity() : turns.front().ts;
  }
};

enum class Format { kJsonl, kCsv };

inline Format format_from_string(const std::string& s) {
  if (s == "jsonl") return Format::kJsonl;
  if (s == "csv") return Format::kCsv;
  throw ConfigError("unknown format '" + s + "' (expected jsonl or csv)");
}

// ---------------------------------------------------------------------------
// Timestamp parsing: RFC 3339 like "2024-03-01T12:30:00Z" / with offset or
// fractional seconds, or a bare epoch-seconds number.

namespace detail {

inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline bool read_digits(std::string_view s, std::size_t& i, int count, int& out) {
  out = 0;
  for (int k = 0; k < count; ++k) {
    if (i >= s.size() || !is_ascii_digit(s[i])) return false;
    out = out * 10 + (s[i] - '0');
    ++i;
  }
  return true;
}

}  // namespace detail

inline double parse_rfc3339(std::string_view s) {
  std::size_t i = 0;
  int year, month, day, hour, minute, second;
  if (!detail::read_digits(s, i, 4, year) || i >= s.size() || s[i] != '-')
    throw DataError("bad timestamp '" + std::string(s) + "'");
  ++i;
  if (!detail::read_digits(s, i, 2, month) || i >= s.size() || s[i] != '-')
    throw DataError("bad timestamp '" + std::string(s) + "'");
  ++i;
  if (!detail::read_digits(s, i, 2, day)) throw DataError("bad timestamp '" + std::string(s) + "'");
  if (i >= s.size() || (s[i] != 'T' && s[i] != 't' && s[i] != ' '))
    throw DataError("bad timestamp '" + std::string(s) + "'");
  ++i;
  if (!detail::read_digits(s, i, 2, hour) || i >= s.size() || s[i] != ':')
    throw DataError("bad timestamp '" + std::string(s) + "'");
  ++i;
  if (!detail::read_digits(s, i, 2, minute) || i >= s.size() || s[i] != ':')
    throw DataError("bad timestamp '" + std::string(s) + "'");
  ++i;
  if (!detail::read_digits(s, i, 2, second)) throw DataError("bad timestamp '" + std::string(s) + "'");
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
    throw DataError("timestamp field out of range in '" + std::string(s) + "'");
  double frac = 0.0;
  if (i < s.size() && s[i] == '.') {
    ++i;
    double scale = 0.1;
    bool any = false;
    while (i < s.size() && is_ascii_digit(s[i])) {
      frac += (s[i] - '0') * scale;
      scale *= 0.1;
      ++i;
      any = true;
    }
    if (!any) throw DataError("bad fractional seconds in '" + std::string(s) + "'");
  }
  int offset_seconds = 0;
  if (i < s.size() && (s[i] == 'Z' || s[i] == 'z')) {
    ++i;
  } else if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    const int sign = s[i] == '+' ? 1 : -1;
    ++i;
    int oh, om;
    if (!detail::read_digits(s, i, 2, oh) || i >= s.size() || s[i] != ':')
      throw DataError("bad timezone offset in '" + std::string(s) + "'");
    ++i;
    if (!detail::read_digits(s, i, 2, om)) throw DataError("bad timezone offset in '" + std::string(s) + "'");
    offset_seconds = sign * (oh * 3600 + om * 60);
  } else {
    throw DataError("missing timezone in '" + std::string(s) + "'");
  }
  if (i != s.size()) throw DataError("trailing characters in timestamp '" + std::string(s) + "'");
  const std::int64_t days = detail::days_from_civil(year, static_cast<unsigned>(month),
                                                    static_cast<unsigned>(day));
  return static_cast<double>(days) * 86400.0 + hour * 3600.0 + minute * 60.0 + second + frac -
         offset_seconds;
}

inline double parse_timestamp(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_rfc3339(v.get<std::string>());
  throw DataError("timestamp must be a number or an RFC3339 string");
}

// ---------------------------------------------------------------------------
// Minimal CSV reader. Handles quoted fields with "" escapes.

namespace detail {

inline std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

inline json parse_json_line(const std::string& line, const std::string& path, std::size_t row) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded())
    throw DataError(path + " row " + std::to_string(row) + ": invalid JSON");
  if (!obj.is_object())
    throw DataError(path + " row " + std::to_string(row) + ": expected a JSON object");
  return obj;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dataset I/O. jsonl rows: {"id"?, "text", "intent", "embedding"?}.
// csv: header row naming at least text and intent columns (id optional).

inline Dataset load_dataset(const std::string& path, Format format) {
  const auto lines = detail::read_lines(path);
  std::vector<LabeledExample> rows;
  if (format == Format::kJsonl) {
    std::size_t row = 0;
    for (const auto& line : lines) {
      ++row;
      if (trim(line).empty()) continue;
      json obj = detail::parse_json_line(line, path, row);
      LabeledExample ex;
      if (obj.contains("id")) {
        if (obj["id"].is_string()) ex.id = obj["id"].get<std::string>();
        else ex.id = obj["id"].dump();
      }
      if (!obj.contains("text") || !obj["text"].is_string())
        throw DataError(path + " row " + std::to_string(row) + ": missing required field 'text'");
      if (!obj.contains("intent") || !obj["intent"].is_string())
        throw DataError(path + " row " + std::to_string(row) + ": missing required field 'intent'");
      ex.text = obj["text"].get<std::string>();
      ex.intent = obj["intent"].get<std::string>();
      if (obj.contains("embedding")) {
        if (!obj["embedding"].is_array())
          throw DataError(path + " row " + std::to_string(row) + ": embedding must be an array");
        ex.embedding = obj["embedding"].get<std::vector<double>>();
      }
      rows.push_back(std::move(ex));
    }
  } else {
    if (lines.empty()) throw DataError("empty dataset");
    const auto header = detail::parse_csv_line(lines[0]);
    std::ptrdiff_t text_col = -1, intent_col = -1, id_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const std::string name = lower_ascii(trim(header[c]));
      if (name == "text") text_col = static_cast<std::ptrdiff_t>(c);
      else if (name == "intent") intent_col = static_cast<std::ptrdiff_t>(c);
      else if (name == "id") id_col = static_cast<std::ptrdiff_t>(c);
    }
    if (text_col < 0 || intent_col < 0)
      throw DataError(path + ": csv header must name 'text' and 'intent' columns");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (trim(lines[i]).empty()) continue;
      const auto fields = detail::parse_csv_line(lines[i]);
      const auto need = static_cast<std::size_t>(std::max(text_col, intent_col)) + 1;
      if (fields.size() < need)
        throw DataError(path + " row " + std::to_string(i + 1) + ": too few columns");
      LabeledExample ex;
      ex.text = fields[static_cast<std::size_t>(text_col)];
      ex.intent = fields[static_cast<std::size_t>(intent_col)];
      if (id_col >= 0 && static_cast<std::size_t>(id_col) < fields.size())
        ex.id = fields[static_cast<std::size_t>(id_col)];
      rows.push_back(std::move(ex));
    }
  }
  if (rows.empty()) throw DataError("empty dataset");
  return Dataset::from_examples(std::move(rows));
}

inline void write_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file '" + path + "'");
  for (const auto& ex : ds.examples) {
    json obj;
    obj["id"] = ex.id;
    obj["text"] = ex.text;
    obj["intent"] = ex.intent;
    if (ex.embedding) obj["embedding"] = *ex.embedding;
    out << obj.dump() << '\n';
  }
}

// Embedding files: jsonl {"id", "vector": [...]} or csv "id,v0,v1,...".
inline std::map<std::string, std::vector<double>> load_embeddings(const std::string& path,
                                                                  Format format) {
  const auto lines = detail::read_lines(path);
  std::map<std::string, std::vector<double>> out;
  if (format == Format::kJsonl) {
    std::size_t row = 0;
    for (const auto& line : lines) {
      ++row;
      if (trim(line).empty()) continue;
      json obj = detail::parse_json_line(line, path, row);
      if (!obj.contains("id") || !obj.contains("vector") || !obj["vector"].is_array())
        throw DataError(path + " row " + std::to_string(row) + ": expected {id, vector}");
      const std::string id = obj["id"].is_string() ? obj["id"].get<std::string>() : obj["id"].dump();
      if (!out.emplace(id, obj["vector"].get<std::vector<double>>()).second)
        throw DataError(path + " row " + std::to_string(row) + ": duplicate id '" + id + "'");
    }
  } else {
    std::size_t start = 0;
    if (!lines.empty()) {
      const auto first = detail::parse_csv_line(lines[0]);
      if (first.size() >= 2 && lower_ascii(trim(first[0])) == "id") start = 1;  // header row
    }
    for (std::size_t i = start; i < lines.size(); ++i) {
      if (trim(lines[i]).empty()) continue;
      const auto fields = detail::parse_csv_line(lines[i]);
      if (fields.size() < 2)
        throw DataError(path + " row " + std::to_string(i + 1) + ": expected id plus numeric columns");
      std::vector<double> vec;
      vec.reserve(fields.size() - 1);
      for (std::size_t c = 1; c < fields.size(); ++c) {
        try {
          vec.push_back(std::stod(fields[c]));
        } catch (const std::exception&) {
          throw DataError(path + " row " + std::to_string(i + 1) + ": non-numeric value '" +
                          fields[c] + "'");
        }
      }
      if (!out.emplace(trim(fields[0]), std::move(vec)).second)
        throw DataError(path + " row " + std::to_string(i + 1) + ": duplicate id");
    }
  }
  return out;
}

inline Dataset attach_embeddings(const Dataset& ds,
                                 const std::map<std::string, std::vector<double>>& vectors) {
  std::vector<std::string> missing, extraneous;
  for (const auto& ex : ds.examples)
    if (!vectors.count(ex.id)) missing.push_back(ex.id);
  for (const auto& [id, _] : vectors)
    if (!ds.id_index.count(id)) extraneous.push_back(id);
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size() && i < 8; ++i) s += (i ? ", " : "") + v[i];
    if (v.size() > 8) s += ", ...";
    return s;
  };
  if (!missing.empty())
    throw DataError("no embedding vector for id(s): " + join(missing));
  if (!extraneous.empty())
    throw DataError("embedding vector(s) for unknown id(s): " + join(extraneous));
  std::optional<std::size_t> dim;
  std::vector<LabeledExample> rows = ds.examples;
  for (auto& ex : rows) {
    const auto& vec = vectors.at(ex.id);
    if (dim && vec.size() != *dim)
      throw DataError("embedding for id '" + ex.id + "' has dimension " +
                      std::to_string(vec.size()) + ", expected " + std::to_string(*dim));
    dim = vec.size();
    if (*dim == 0) throw DataError("zero-dimensional embedding for id '" + ex.id + "'");
    ex.embedding = vec;
  }
  return Dataset::from_examples(std::move(rows));
}

// ---------------------------------------------------------------------------
// Train/test preparation: drop small classes, then split each remaining
// intent at test_fraction (at least one test example per intent).

struct SplitOptions {
  std::int64_t min_class_size = 10;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::string> dropped_intents;
};

inline SplitResult prepare_split(const Dataset& ds, const SplitOptions& opt) {
  if (!(opt.test_fraction > 0.0 && opt.test_fraction < 1.0))
    throw ConfigError("test_fraction must be in (0,1)");
  SplitMix64 rng(opt.seed);
  std::vector<std::size_t> train_idx, test_idx;
  std::vector<std::string> dropped;
  for (const auto& [intent, indices] : ds.intent_index) {
    if (static_cast<std::int64_t>(indices.size()) < opt.min_class_size) {
      dropped.push_back(intent);
      continue;
    }
    std::vector<std::size_t> shuffled = indices;
    rng.shuffle(shuffled);
    const auto size = static_cast<std::int64_t>(shuffled.size());
    std::int64_t n_test = std::llround(opt.test_fraction * static_cast<double>(size));
    n_test = std::max<std::int64_t>(1, std::min(n_test, size));
    for (std::int64_t i = 0; i < size; ++i) {
      if (i < n_test) test_idx.push_back(shuffled[static_cast<std::size_t>(i)]);
      else train_idx.push_back(shuffled[static_cast<std::size_t>(i)]);
    }
  }
  if (train_idx.empty() && test_idx.empty()) throw DataError("no trainable intents");
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  auto pick = [&](const std::vector<std::size_t>& idx) {
    std::vector<LabeledExample> rows;
    rows.reserve(idx.size());
    for (std::size_t i : idx) rows.push_back(ds.examples[i]);
    return Dataset::from_examples(std::move(rows));
  };
  return SplitResult{pick(train_idx), pick(test_idx), std::move(dropped)};
}

// ---------------------------------------------------------------------------
// Predictions jsonl: {"id", "gold", "predicted", "confidence"}.

inline std::vector<PredictionRecord> load_predictions(const std::string& path) {
  const auto lines = detail::read_lines(path);
  std::vector<PredictionRecord> out;
  std::size_t row = 0;
  for (const auto& line : lines) {
    ++row;
    if (trim(line).empty()) continue;
    json obj = detail::parse_json_line(line, path, row);
    for (const char* field : {"id", "gold", "predicted", "confidence"})
      if (!obj.contains(field))
        throw DataError(path + " row " + std::to_string(row) + ": missing field '" +
                        std::string(field) + "'");
    PredictionRecord rec;
    rec.example_id = obj["id"].is_string() ? obj["id"].get<std::string>() : obj["id"].dump();
    rec.gold = obj["gold"].get<std::string>();
    rec.predicted = obj["predicted"].get<std::string>();
    rec.confidence = obj["confidence"].get<double>();
    if (rec.confidence < 0.0 || rec.confidence > 1.0)
      throw DataError(path + " row " + std::to_string(row) + ": confidence out of [0,1]");
    rec.correct = rec.gold == rec.predicted;
    out.push_back(std::move(rec));
  }
  return out;
}

inline void write_predictions(const std::vector<PredictionRecord>& recs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file '" + path + "'");
  for (const auto& r : recs) {
    json obj;
    obj["id"] = r.example_id;
    obj["gold"] = r.gold;
    obj["predicted"] = r.predicted;
    obj["confidence"] = r.confidence;
    out << obj.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Conversation logs jsonl:
// {"conversation_id", "outcome", "business_hours",
//  "turns": [{"ts", "speaker", "text", "intent"?, "confidence"?}]}

inline std::vector<ConversationLog> load_logs(const std::string& path) {
  const auto lines = detail::read_lines(path);
  std::vector<ConversationLog> logs;
  std::size_t row = 0;
  for (const auto& line : lines) {
    ++row;
    if (trim(line).empty()) continue;
    json obj = detail::parse_json_line(line, path, row);
    ConversationLog log;
    if (obj.contains("conversation_id"))
      log.conversation_id = obj["conversation_id"].is_string()
                                ? obj["conversation_id"].get<std::string>()
                                : obj["conversation_id"].dump();
    else
      log.conversation_id = "row-" + std::to_string(row);
    if (!obj.contains("outcome"))
      throw DataError(path + " row " + std::to_string(row) + ": conversation '" +
                      log.conversation_id + "' is missing outcome");
    log.outcome = outcome_from_string(obj["outcome"].get<std::string>());
    log.business_hours = obj.value("business_hours", true);
    if (obj.contains("turns")) {
      if (!obj["turns"].is_array())
        throw DataError(path + " row " + std::to_string(row) + ": turns must be an array");
      double prev = -std::numeric_limits<double>::infinity();
      for (const auto& t : obj["turns"]) {
        Turn turn;
        if (!t.contains("ts"))
          throw DataError(path + " row " + std::to_string(row) + ": turn missing ts");
        turn.ts = parse_timestamp(t["ts"]);
        if (turn.ts < prev)
          throw DataError("conversation '" + log.conversation_id +
                          "': timestamps are not non-decreasing");
        prev = turn.ts;
        turn.speaker = speaker_from_string(t.value("speaker", std::string("user")));
        turn.text = t.value("text", std::string());
        if (t.contains("intent") && !t["intent"].is_null())
          turn.resolved_intent = t["intent"].get<std::string>();
        if (t.contains("confidence") && !t["confidence"].is_null())
          turn.confidence = t["confidence"].get<double>();
        log.turns.push_back(std::move(turn));
      }
    }
    logs.push_back(std::move(log));
  }
  std::stable_sort(logs.begin(), logs.end(), [](const ConversationLog& a, const ConversationLog& b) {
    return a.start_ts() < b.start_ts();
  });
  return logs;
}

inline void write_logs(const std::vector<ConversationLog>& logs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file '" + path + "'");
  for (const auto& log : logs) {
    json turns = json::array();
    for (const auto& t : log.turns) {
      json turn;
      turn["ts"] = t.ts;
      turn["speaker"] = to_string(t.speaker);
      turn["text"] = t.text;
      if (t.resolved_intent) turn["intent"] = *t.resolved_intent;
      if (t.confidence) turn["confidence"] = *t.confidence;
      turns.push_back(std::move(turn));
    }
    json obj;
    obj["conversation_id"] = log.conversation_id;
    obj["outcome"] = to_string(log.outcome);
    obj["business_hours"] = log.business_hours;
    obj["turns"] = std::move(turns);
    out << obj.dump() << '\n';
  }
}

}  // namespace chatcheck::corpus
