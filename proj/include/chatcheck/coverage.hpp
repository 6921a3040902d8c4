#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chatcheck/common.hpp"
#include "chatcheck/metafeatures.hpp"
#include "chatcheck/rng.hpp"

namespace chatcheck::cov {

struct Parameter {
  std::string name;
  std::vector<std::string> values;
};

struct Literal {
  std::size_t param = 0;
  std::size_t value = 0;

  friend auto operator<=>(const Literal&, const Literal&) = default;
};

// One value index per parameter, in parameter order.
using Row = std::vector<std::size_t>;

// Parameters with ordered value domains, plus forbidden partial assignments
// (conjunctions of parameter=value literals).
struct CombinatorialModel {
  std::vector<Parameter> parameters;
  std::vector<std::vector<Literal>> constraints;

  int param_index(std::string_view name) const {
    for (std::size_t i = 0; i < parameters.size(); ++i)
      if (parameters[i].name == name) return static_cast<int>(i);
    return -1;
  }

  int value_index(std::size_t param, std::string_view label) const {
    const auto& vals = parameters[param].values;
    for (std::size_t i = 0; i < vals.size(); ++i)
      if (vals[i] == label) return static_cast<int>(i);
    return -1;
  }

  void validate() const {
    if (parameters.size() < 2) throw DataError("model needs at least 2 parameters");
    std::set<std::string> names;
    for (const auto& p : parameters) {
      if (p.name.empty()) throw DataError("parameter with empty name");
      if (!names.insert(p.name).second) throw DataError("duplicate parameter '" + p.name + "'");
      if (p.values.size() < 2)
        throw DataError("parameter '" + p.name + "' needs at least 2 values");
      std::set<std::string> vals(p.values.begin(), p.values.end());
      if (vals.size() != p.values.size())
        throw DataError("parameter '" + p.name + "' has duplicate values");
    }
    for (const auto& c : constraints) {
      if (c.empty()) throw DataError("empty constraint");
      std::set<std::size_t> params;
      for (const auto& lit : c) {
        if (lit.param >= parameters.size() ||
            lit.value >= parameters[lit.param].values.size())
          throw DataError("constraint references an undeclared parameter or value");
        if (!params.insert(lit.param).second)
          throw DataError("constraint repeats a parameter");
      }
    }
  }

  double space_size() const {
    double s = 1.0;
    for (const auto& p : parameters) s *= static_cast<double>(p.values.size());
    return s;
  }
};

inline bool row_satisfies(const CombinatorialModel& model, const Row& row) {
  for (const auto& c : model.constraints) {
    bool all = true;
    for (const auto& lit : c)
      if (row[lit.param] != lit.value) {
        all = false;
        break;
      }
    if (all) return false;
  }
  return true;
}

// The five-parameter natural-language input model. COMPLEXITY is
// observational: its cells are satisfied by selection from a pool, never by
// text transformation.
inline CombinatorialModel default_nlu_model() {
  CombinatorialModel m;
  m.parameters = {
      {"SPELLING", {"CORRECT", "SINGLE_ERROR", "MULTIPLE_ERRORS"}},
      {"CASE", {"ALL_LOWER", "ALL_UPPER", "MIXED"}},
      {"CONTRACTIONS", {"True", "False"}},
      {"LENGTH", {"LOW_0_25", "MED_25_75", "HIGH_75_100"}},
      {"COMPLEXITY", {"LOW_0_25", "MED_25_75", "HIGH_75_100"}},
  };
  return m;
}

// ---------------------------------------------------------------------------
// t-tuple bookkeeping: every size-t parameter subset in lexicographic order,
// value combinations ranked mixed-radix within each subset.

namespace detail {

struct TupleSpace {
  int t = 0;
  std::vector<std::vector<std::size_t>> subsets;
  std::vector<std::size_t> base;  // flat offset per subset
  std::size_t total = 0;

  static TupleSpace build(const CombinatorialModel& model, int t) {
    TupleSpace ts;
    ts.t = t;
    const std::size_t n = model.parameters.size();
    std::vector<std::size_t> subset(static_cast<std::size_t>(t));
    for (std::size_t i = 0; i < subset.size(); ++i) subset[i] = i;
    while (true) {
      ts.subsets.push_back(subset);
      std::size_t combos = 1;
      for (std::size_t p : subset) combos *= model.parameters[p].values.size();
      ts.base.push_back(ts.total);
      ts.total += combos;
      // next lexicographic combination
      std::size_t k = subset.size();
      std::size_t i = k;
      while (i > 0 && subset[i - 1] == n - k + (i - 1)) --i;
      if (i == 0) break;
      ++subset[i - 1];
      for (std::size_t j = i; j < k; ++j) subset[j] = subset[j - 1] + 1;
    }
    return ts;
  }

  // Flat index of the tuple (subsets[si], row values at those params).
  std::size_t index_of(const CombinatorialModel& model, std::size_t si, const Row& row) const {
    std::size_t rank = 0;
    for (std::size_t p : subsets[si]) rank = rank * model.parameters[p].values.size() + row[p];
    return base[si] + rank;
  }

  // Decode flat index back into literals (sorted by parameter).
  std::vector<Literal> decode(const CombinatorialModel& model, std::size_t flat) const {
    std::size_t si = 0;
    while (si + 1 < base.size() && base[si + 1] <= flat) ++si;
    std::size_t rank = flat - base[si];
    const auto& subset = subsets[si];
    std::vector<Literal> lits(subset.size());
    for (std::size_t i = subset.size(); i > 0; --i) {
      const std::size_t p = subset[i - 1];
      const std::size_t dsz = model.parameters[p].values.size();
      lits[i - 1] = Literal{p, rank % dsz};
      rank /= dsz;
    }
    return lits;
  }
};

constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
constexpr double kExactEnumerationLimit = 200000.0;

inline bool partial_violates(const CombinatorialModel& model, const Row& partial) {
  for (const auto& c : model.constraints) {
    bool all = true;
    for (const auto& lit : c)
      if (partial[lit.param] != lit.value) {
        all = false;
        break;
      }
    if (all) return true;
  }
  return false;
}

// Depth-first completion search under the forbidden-tuple constraints.
inline bool complete_assignment(const CombinatorialModel& model, Row& partial, std::size_t param) {
  const std::size_t n = model.parameters.size();
  while (param < n && partial[param] != kUnset) ++param;
  if (param == n) return !partial_violates(model, partial);
  for (std::size_t v = 0; v < model.parameters[param].values.size(); ++v) {
    partial[param] = v;
    bool pruned = false;
    for (const auto& c : model.constraints) {
      bool all = true;
      for (const auto& lit : c)
        if (partial[lit.param] == kUnset || partial[lit.param] != lit.value) {
          all = false;
          break;
        }
      if (all) {
        pruned = true;
        break;
      }
    }
    if (!pruned && complete_assignment(model, partial, param + 1)) return true;
    partial[param] = kUnset;
  }
  return false;
}

inline bool satisfiable(const CombinatorialModel& model, Row partial) {
  return complete_assignment(model, partial, 0);
}

// Enumerate all full rows in lexicographic order, calling fn on valid ones.
template <class Fn>
inline void for_each_valid_row(const CombinatorialModel& model, Fn&& fn) {
  const std::size_t n = model.parameters.size();
  Row row(n, 0);
  while (true) {
    if (row_satisfies(model, row)) fn(row);
    std::size_t i = n;
    while (i > 0) {
      if (++row[i - 1] < model.parameters[i - 1].values.size()) break;
      row[i - 1] = 0;
      --i;
    }
    if (i == 0) break;
  }
}

// Marks which flat tuple slots are satisfiable; returns the count.
inline std::size_t compute_satisfiable(const CombinatorialModel& model, const TupleSpace& ts,
                                       std::vector<char>& sat) {
  sat.assign(ts.total, 0);
  std::size_t count = 0;
  if (model.space_size() <= kExactEnumerationLimit) {
    bool any = false;
    for_each_valid_row(model, [&](const Row& row) {
      any = true;
      for (std::size_t si = 0; si < ts.subsets.size(); ++si) {
        const std::size_t idx = ts.index_of(model, si, row);
        if (!sat[idx]) {
          sat[idx] = 1;
          ++count;
        }
      }
    });
    if (!any) throw DataError("unsatisfiable model: no valid full assignment exists");
    return count;
  }
  Row empty(model.parameters.size(), kUnset);
  if (!satisfiable(model, empty))
    throw DataError("unsatisfiable model: no valid full assignment exists");
  for (std::size_t si = 0; si < ts.subsets.size(); ++si) {
    const auto& subset = ts.subsets[si];
    Row partial(model.parameters.size(), kUnset);
    std::vector<std::size_t> combo(subset.size(), 0);
    while (true) {
      for (std::size_t i = 0; i < subset.size(); ++i) partial[subset[i]] = combo[i];
      if (satisfiable(model, partial)) {
        Row probe = partial;
        const std::size_t idx = ts.index_of(model, si, probe);
        sat[idx] = 1;
        ++count;
      }
      for (std::size_t i = 0; i < subset.size(); ++i) partial[subset[i]] = kUnset;
      std::size_t i = subset.size();
      while (i > 0) {
        if (++combo[i - 1] < model.parameters[subset[i - 1]].values.size()) break;
        combo[i - 1] = 0;
        --i;
      }
      if (i == 0) break;
    }
  }
  return count;
}

}  // namespace detail

struct TestPlan {
  int strength = 2;
  std::vector<Row> rows;
};

// Greedy AETG-style construction: each appended row maximizes newly covered
// satisfiable t-tuples. Small spaces are searched exhaustively with a
// lexicographic tie-break; large spaces sample seeded candidate rows, so the
// result is deterministic for a given (model, t, seed).
inline TestPlan generate_plan(const CombinatorialModel& model, int t = 2,
                              std::uint64_t rng_seed = 0) {
  model.validate();
  if (t < 1 || static_cast<std::size_t>(t) > model.parameters.size())
    throw ConfigError("strength t out of range");
  const auto ts = detail::TupleSpace::build(model, t);
  std::vector<char> sat;
  std::size_t remaining = detail::compute_satisfiable(model, ts, sat);
  std::vector<char> covered(ts.total, 0);
  TestPlan plan;
  plan.strength = t;
  const bool exact = model.space_size() <= detail::kExactEnumerationLimit;
  SplitMix64 rng(rng_seed);

  auto gain_of = [&](const Row& row) {
    std::size_t gain = 0;
    for (std::size_t si = 0; si < ts.subsets.size(); ++si) {
      const std::size_t idx = ts.index_of(model, si, row);
      if (sat[idx] && !covered[idx]) ++gain;
    }
    return gain;
  };
  auto mark = [&](const Row& row) {
    for (std::size_t si = 0; si < ts.subsets.size(); ++si) {
      const std::size_t idx = ts.index_of(model, si, row);
      if (sat[idx] && !covered[idx]) {
        covered[idx] = 1;
        --remaining;
      }
    }
  };
  auto forced_row = [&]() -> Row {
    // Complete the first uncovered satisfiable tuple into a full valid row.
    for (std::size_t flat = 0; flat < ts.total; ++flat) {
      if (!sat[flat] || covered[flat]) continue;
      Row partial(model.parameters.size(), detail::kUnset);
      for (const auto& lit : ts.decode(model, flat)) partial[lit.param] = lit.value;
      if (detail::complete_assignment(model, partial, 0)) return partial;
    }
    throw DataError("internal: uncovered tuple has no completion");
  };

  while (remaining > 0) {
    Row best;
    std::size_t best_gain = 0;
    if (exact) {
      detail::for_each_valid_row(model, [&](const Row& row) {
        const std::size_t g = gain_of(row);
        if (g > best_gain) {
          best_gain = g;
          best = row;
        }
      });
    } else {
      for (int c = 0; c < 50; ++c) {
        std::vector<std::size_t> order(model.parameters.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);
        Row cand(model.parameters.size(), detail::kUnset);
        for (std::size_t p : order) {
          std::size_t best_v = 0, best_vg = 0;
          for (std::size_t v = 0; v < model.parameters[p].values.size(); ++v) {
            cand[p] = v;
            std::size_t g = 0;
            for (std::size_t si = 0; si < ts.subsets.size(); ++si) {
              bool assigned = true;
              for (std::size_t q : ts.subsets[si])
                if (cand[q] == detail::kUnset) {
                  assigned = false;
                  break;
                }
              if (!assigned) continue;
              const std::size_t idx = ts.index_of(model, si, cand);
              if (sat[idx] && !covered[idx]) ++g;
            }
            if (v == 0 || g > best_vg) {
              best_vg = g;
              best_v = v;
            }
          }
          cand[p] = best_v;
        }
        if (!row_satisfies(model, cand)) continue;
        const std::size_t g = gain_of(cand);
        if (g > best_gain) {
          best_gain = g;
          best = cand;
        }
      }
    }
    if (best_gain == 0) {
      best = forced_row();
      if (gain_of(best) == 0) throw DataError("internal: no progress in plan generation");
    }
    plan.rows.push_back(best);
    mark(best);
  }
  return plan;
}

struct Tuple {
  std::vector<Literal> literals;  // sorted by parameter index
};

struct CoverageReport {
  std::int64_t covered = 0;
  std::int64_t total = 0;  // satisfiable t-tuples
  std::vector<Tuple> uncovered;

  double fraction() const {
    return total == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(total);
  }
};

// Coverage of a pool of observed assignments. Tuples only count toward the
// denominator when some constraint-satisfying full assignment contains them.
inline CoverageReport measure_coverage(const std::vector<Row>& pool,
                                       const CombinatorialModel& model, int t) {
  model.validate();
  if (t < 1 || static_cast<std::size_t>(t) > model.parameters.size())
    throw ConfigError("strength t out of range");
  for (const auto& row : pool) {
    if (row.size() != model.parameters.size())
      throw DataError("pool row arity does not match the model");
    for (std::size_t p = 0; p < row.size(); ++p)
      if (row[p] >= model.parameters[p].values.size())
        throw DataError("pool row value out of range for parameter '" +
                        model.parameters[p].name + "'");
  }
  const auto ts = detail::TupleSpace::build(model, t);
  std::vector<char> sat;
  const std::size_t total = detail::compute_satisfiable(model, ts, sat);
  std::vector<char> covered(ts.total, 0);
  CoverageReport report;
  report.total = static_cast<std::int64_t>(total);
  for (const auto& row : pool) {
    for (std::size_t si = 0; si < ts.subsets.size(); ++si) {
      const std::size_t idx = ts.index_of(model, si, row);
      if (sat[idx] && !covered[idx]) {
        covered[idx] = 1;
        ++report.covered;
      }
    }
  }
  for (std::size_t flat = 0; flat < ts.total; ++flat)
    if (sat[flat] && !covered[flat]) report.uncovered.push_back(Tuple{ts.decode(model, flat)});
  return report;
}

// ---------------------------------------------------------------------------
// Model file format (one entry per line):
//   param NAME: VALUE VALUE ...
//   forbid NAME=VALUE NAME=VALUE
// '#' starts a comment.

inline CombinatorialModel parse_model(const std::string& text) {
  CombinatorialModel model;
  std::size_t lineno = 0;
  for (const auto& raw : split_on(text, '\n')) {
    ++lineno;
    const auto line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto err = [&](const std::string& msg) {
      return DataError("model line " + std::to_string(lineno) + ": " + msg);
    };
    if (line.rfind("param ", 0) == 0) {
      const auto colon = line.find(':');
      if (colon == std::string_view::npos) throw err("expected 'param NAME: VALUES'");
      Parameter p;
      p.name = std::string(trim(line.substr(6, colon - 6)));
      for (const auto& v : split_ws(line.substr(colon + 1))) p.values.push_back(v);
      model.parameters.push_back(std::move(p));
    } else if (line.rfind("forbid ", 0) == 0) {
      std::vector<Literal> c;
      for (const auto& tok : split_ws(line.substr(7))) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw err("expected NAME=VALUE literals");
        const int pi = model.param_index(trim(std::string_view(tok).substr(0, eq)));
        if (pi < 0) throw err("unknown parameter in constraint");
        const int vi = model.value_index(static_cast<std::size_t>(pi),
                                         trim(std::string_view(tok).substr(eq + 1)));
        if (vi < 0) throw err("unknown value in constraint");
        c.push_back(Literal{static_cast<std::size_t>(pi), static_cast<std::size_t>(vi)});
      }
      model.constraints.push_back(std::move(c));
    } else {
      throw err("expected 'param' or 'forbid'");
    }
  }
  model.validate();
  return model;
}

inline CombinatorialModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

inline std::string model_to_text(const CombinatorialModel& model) {
  std::string out;
  for (const auto& p : model.parameters) {
    out += "param " + p.name + ":";
    for (const auto& v : p.values) out += " " + v;
    out += "\n";
  }
  for (const auto& c : model.constraints) {
    out += "forbid";
    for (const auto& lit : c)
      out += " " + model.parameters[lit.param].name + "=" +
             model.parameters[lit.param].values[lit.value];
    out += "\n";
  }
  return out;
}

inline std::string plan_to_csv(const CombinatorialModel& model, const TestPlan& plan) {
  std::string out;
  for (std::size_t p = 0; p < model.parameters.size(); ++p)
    out += (p ? "," : "") + model.parameters[p].name;
  out += "\n";
  for (const auto& row : plan.rows) {
    for (std::size_t p = 0; p < row.size(); ++p)
      out += (p ? "," : "") + model.parameters[p].values[row[p]];
    out += "\n";
  }
  return out;
}

inline std::string coverage_report_to_text(const CombinatorialModel& model,
                                           const CoverageReport& report, int t) {
  std::string out = "t=" + std::to_string(t) + " coverage: " + std::to_string(report.covered) +
                    "/" + std::to_string(report.total) + " (" + fmt_double(report.fraction()) +
                    ")\n";
  for (const auto& tup : report.uncovered) {
    out += "uncovered:";
    for (const auto& lit : tup.literals)
      out += " " + model.parameters[lit.param].name + "=" +
             model.parameters[lit.param].values[lit.value];
    out += "\n";
  }
  return out;
}

// Maps an extracted meta-feature vector into a row of the given model.
// LENGTH and COMPLEXITY need fitted bin schemes; user-defined categorical
// meta-features are looked up in the extras map.
inline Row nlu_row(const meta::MetaFeatureVector& mfv, const CombinatorialModel& model,
                   const std::optional<meta::BinScheme>& length_scheme,
                   const std::optional<meta::BinScheme>& complexity_scheme) {
  Row row(model.parameters.size());
  for (std::size_t p = 0; p < model.parameters.size(); ++p) {
    const std::string& name = model.parameters[p].name;
    std::string label;
    if (name == "SPELLING") {
      label = meta::to_string(mfv.spelling);
    } else if (name == "CASE") {
      label = meta::to_string(mfv.case_style);
    } else if (name == "CONTRACTIONS") {
      label = mfv.contractions ? "True" : "False";
    } else if (name == "LENGTH") {
      if (!length_scheme) throw ConfigError("LENGTH parameter needs a fitted bin scheme");
      label = meta::to_string(meta::bin_value(mfv.length, *length_scheme));
    } else if (name == "COMPLEXITY") {
      if (!complexity_scheme) throw ConfigError("COMPLEXITY parameter needs a fitted bin scheme");
      if (!mfv.complexity) throw DataError("meta-feature vector has no complexity value");
      label = meta::to_string(meta::bin_value(*mfv.complexity, *complexity_scheme));
    } else {
      auto it = mfv.extras.find(name);
      if (it == mfv.extras.end() || !std::holds_alternative<std::string>(it->second))
        throw DataError("cannot derive model parameter '" + name + "' from meta-features");
      label = std::get<std::string>(it->second);
    }
    const int vi = model.value_index(p, label);
    if (vi < 0)
      throw DataError("value '" + label + "' is not in the domain of parameter '" + name + "'");
    row[p] = static_cast<std::size_t>(vi);
  }
  return row;
}

// ---------------------------------------------------------------------------
// Rule-based perturbation: transforms a seed utterance so its extracted
// meta-features hit a requested cell over SPELLING / CASE / CONTRACTIONS /
// LENGTH. The transforms preserve the intent label by construction: typo
// injection, case folding or raising, contraction application or expansion.
// LENGTH is checked, never synthesized. Unreachable cells are reported.

struct PerturbationSpec {
  std::map<std::string, std::string> cell;  // parameter -> requested value label
  std::uint64_t rng_seed = 0;
  std::optional<meta::BinScheme> length_scheme;  // required iff LENGTH is requested
};

struct PerturbResult {
  std::string text;
  std::vector<std::string> transforms;
};

namespace detail {

inline const std::map<char, std::string>& qwerty_neighbors() {
  static const std::map<char, std::string> k = {
      {'a', "qwsz"}, {'b', "vghn"}, {'c', "xdfv"}, {'d', "serfcx"}, {'e', "wsdr"},
      {'f', "drtgvc"}, {'g', "ftyhbv"}, {'h', "gyujnb"}, {'i', "ujko"}, {'j', "huiknm"},
      {'k', "jiolm"}, {'l', "kop"}, {'m', "njk"}, {'n', "bhjm"}, {'o', "iklp"},
      {'p', "ol"}, {'q', "was"}, {'r', "edft"}, {'s', "awedxz"}, {'t', "rfgy"},
      {'u', "yhji"}, {'v', "cfgb"}, {'w', "qase"}, {'x', "zsdc"}, {'y', "tghu"},
      {'z', "asx"}};
  return k;
}

inline DataError unreachable(const std::string& why) {
  return DataError("unreachable cell: " + why);
}

// Leading/trailing decorations of a raw token (quotes, punctuation).
struct TokenShell {
  std::string prefix, core, suffix;
};

inline TokenShell split_shell(const std::string& raw) {
  auto keep = [](char c) { return is_ascii_alpha(c) || is_ascii_digit(c) || c == '\''; };
  std::size_t b = 0, e = raw.size();
  while (b < e && !keep(raw[b])) ++b;
  while (e > b && !keep(raw[e - 1])) --e;
  return TokenShell{raw.substr(0, b), raw.substr(b, e - b), raw.substr(e)};
}

inline bool first_alpha_upper(const std::string& s) {
  for (char c : s) {
    if (c >= 'A' && c <= 'Z') return true;
    if (c >= 'a' && c <= 'z') return false;
  }
  return false;
}

inline std::string capitalize(std::string s) {
  for (char& c : s)
    if (is_ascii_alpha(c)) {
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
      break;
    }
  return s;
}

}  // namespace detail

inline PerturbResult perturb(std::string_view seed_text, const PerturbationSpec& spec,
                             const meta::Dictionary& dict, const meta::ContractionLexicon& lex) {
  if (trim(seed_text).empty()) throw DataError("empty seed text");
  static const std::set<std::string> kTransformable = {"SPELLING", "CASE", "CONTRACTIONS",
                                                       "LENGTH"};
  for (const auto& [param, value] : spec.cell) {
    if (param == "COMPLEXITY")
      throw ConfigError("COMPLEXITY is observational and cannot be a perturbation target");
    if (!kTransformable.count(param))
      throw ConfigError("unknown perturbation parameter '" + param + "'");
    (void)value;
  }
  SplitMix64 rng(spec.rng_seed);
  PerturbResult result;
  std::vector<std::string> tokens = split_ws(std::string(seed_text));

  auto current = [&]() {
    std::string text;
    for (std::size_t i = 0; i < tokens.size(); ++i) text += (i ? " " : "") + tokens[i];
    return text;
  };

  // CONTRACTIONS first: application/expansion changes the token stream that
  // the later transforms work on.
  if (auto it = spec.cell.find("CONTRACTIONS"); it != spec.cell.end()) {
    const bool want = it->second == "True";
    if (!want && it->second != "False")
      throw ConfigError("CONTRACTIONS value must be True or False");
    const auto has_contraction = [&]() {
      for (const auto& tok : tokens)
        if (lex.is_contraction(meta::detail::normalize_token(tok))) return true;
      return false;
    };
    if (want && !has_contraction()) {
      bool applied = false;
      for (const auto& [expansion, surface] : lex.application_pairs()) {
        const auto words = split_ws(expansion);
        for (std::size_t i = 0; i + words.size() <= tokens.size(); ++i) {
          bool match = true;
          for (std::size_t j = 0; j < words.size(); ++j)
            if (meta::detail::normalize_token(tokens[i + j]) != words[j]) {
              match = false;
              break;
            }
          if (!match) continue;
          const auto first = detail::split_shell(tokens[i]);
          const auto last = detail::split_shell(tokens[i + words.size() - 1]);
          std::string replacement = surface;
          if (detail::first_alpha_upper(first.core)) replacement = detail::capitalize(replacement);
          tokens[i] = first.prefix + replacement + last.suffix;
          tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                       tokens.begin() + static_cast<std::ptrdiff_t>(i + words.size()));
          result.transforms.push_back("contraction: '" + expansion + "' -> '" + surface + "'");
          applied = true;
          break;
        }
        if (applied) break;
      }
      if (!applied) throw detail::unreachable("CONTRACTIONS=True (no expandable phrase in seed)");
    } else if (!want) {
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string norm = meta::detail::normalize_token(tokens[i]);
        if (!lex.is_contraction(norm)) continue;
        const auto expansion = lex.expansion_of(norm);
        if (!expansion)
          throw detail::unreachable("CONTRACTIONS=False ('" + norm + "' has no expansion)");
        const auto shell = detail::split_shell(tokens[i]);
        auto words = split_ws(*expansion);
        if (detail::first_alpha_upper(shell.core)) words[0] = detail::capitalize(words[0]);
        words[0] = shell.prefix + words[0];
        words.back() += shell.suffix;
        result.transforms.push_back("expansion: '" + norm + "' -> '" + *expansion + "'");
        tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i));
        tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(i), words.begin(), words.end());
        i += words.size() - 1;
      }
    }
  }

  // SPELLING: inject typos until the requested out-of-dictionary count is
  // reached. There is no repair transform, so targets below the seed's
  // current error count are unreachable.
  if (auto it = spec.cell.find("SPELLING"); it != spec.cell.end()) {
    auto count_errors = [&]() {
      int errors = 0;
      for (const auto& tok : tokens) {
        const std::string norm = meta::detail::normalize_token(tok);
        if (norm.empty() || lex.is_contraction(norm)) continue;
        if (meta::detail::token_has_alpha(norm) &&
            meta::detail::token_misspelled(norm, dict, lex))
          ++errors;
      }
      return errors;
    };
    int target;
    if (it->second == "CORRECT") target = 0;
    else if (it->second == "SINGLE_ERROR") target = 1;
    else if (it->second == "MULTIPLE_ERRORS") target = 2;
    else throw ConfigError("unknown SPELLING value '" + it->second + "'");
    int have = count_errors();
    if (have > target && !(target == 2 && have >= 2))
      throw detail::unreachable("SPELLING=" + it->second + " (seed already has " +
                                std::to_string(have) + " misspelled tokens; repair is not supported)");
    std::set<std::size_t> touched;
    while (have < target) {
      // Eligible: plain in-dictionary alphabetic tokens of length >= 3.
      std::vector<std::size_t> eligible;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (touched.count(i)) continue;
        const std::string norm = meta::detail::normalize_token(tokens[i]);
        if (norm.size() < 3 || lex.is_contraction(norm)) continue;
        bool plain = true;
        for (char c : norm)
          if (!is_ascii_alpha(c)) plain = false;
        if (!plain || !dict.contains(norm)) continue;
        eligible.push_back(i);
      }
      if (eligible.empty())
        throw detail::unreachable("SPELLING=" + it->second + " (no eligible token to corrupt)");
      bool injected = false;
      for (int attempt = 0; attempt < 30 && !injected; ++attempt) {
        const std::size_t ti = eligible[static_cast<std::size_t>(rng.below(eligible.size()))];
        auto shell = detail::split_shell(tokens[ti]);
        std::string word = shell.core;
        std::vector<std::size_t> alpha_pos;
        for (std::size_t p = 0; p < word.size(); ++p)
          if (is_ascii_alpha(word[p])) alpha_pos.push_back(p);
        if (alpha_pos.empty()) continue;
        const std::size_t pos = alpha_pos[static_cast<std::size_t>(rng.below(alpha_pos.size()))];
        std::string mutated = word;
        const char* kind;
        if (rng.below(2) == 0) {
          kind = "substitute";
          const char lower = static_cast<char>(word[pos] >= 'A' && word[pos] <= 'Z'
                                                   ? word[pos] - 'A' + 'a'
                                                   : word[pos]);
          const auto& nbrs = detail::qwerty_neighbors().at(lower);
          char repl = nbrs[static_cast<std::size_t>(rng.below(nbrs.size()))];
          if (word[pos] >= 'A' && word[pos] <= 'Z') repl = static_cast<char>(repl - 'a' + 'A');
          mutated[pos] = repl;
        } else {
          kind = "delete";
          mutated.erase(pos, 1);
        }
        const std::string norm = meta::detail::normalize_token(mutated);
        if (norm.empty() || lex.is_contraction(norm) || dict.contains(norm)) continue;
        result.transforms.push_back(std::string("typo(") + kind + "): '" + word + "' -> '" +
                                    mutated + "'");
        tokens[ti] = shell.prefix + mutated + shell.suffix;
        touched.insert(ti);
        injected = true;
      }
      if (!injected)
        throw detail::unreachable("SPELLING=" + it->second + " (typo injection failed)");
      have = count_errors();
    }
  }

  // CASE last among text edits so folding applies to the final token stream.
  if (auto it = spec.cell.find("CASE"); it != spec.cell.end()) {
    std::string text = current();
    if (it->second == "ALL_LOWER") {
      tokens = split_ws(lower_ascii(text));
      result.transforms.push_back("case: fold to lower");
    } else if (it->second == "ALL_UPPER") {
      tokens = split_ws(upper_ascii(text));
      result.transforms.push_back("case: raise to upper");
    } else if (it->second == "MIXED") {
      bool any_upper = false, any_lower = false;
      for (char c : text) {
        if (c >= 'A' && c <= 'Z') any_upper = true;
        if (c >= 'a' && c <= 'z') any_lower = true;
      }
      if (!(any_upper && any_lower)) {
        std::string folded = lower_ascii(text);
        int alpha = 0;
        for (char c : folded)
          if (is_ascii_alpha(c)) ++alpha;
        if (alpha < 2) throw detail::unreachable("CASE=MIXED (fewer than 2 letters)");
        for (char& c : folded)
          if (c >= 'a' && c <= 'z') {
            c = static_cast<char>(c - 'a' + 'A');
            break;
          }
        tokens = split_ws(folded);
        result.transforms.push_back("case: capitalize first letter");
      }
    } else {
      throw ConfigError("unknown CASE value '" + it->second + "'");
    }
  }

  result.text = current();

  // Closure check: the output must land in the requested cell for every
  // requested parameter.
  const auto mfv = meta::extract(result.text, dict, lex);
  for (const auto& [param, value] : spec.cell) {
    std::string got;
    if (param == "SPELLING") got = meta::to_string(mfv.spelling);
    else if (param == "CASE") got = meta::to_string(mfv.case_style);
    else if (param == "CONTRACTIONS") got = mfv.contractions ? "True" : "False";
    else {  // LENGTH
      if (!spec.length_scheme) throw ConfigError("LENGTH target needs a bin scheme");
      got = meta::to_string(meta::bin_value(mfv.length, *spec.length_scheme));
    }
    if (got != value)
      throw detail::unreachable(param + "=" + value + " (result lands in " + param + "=" + got +
                                ")");
  }
  return result;
}

}  // namespace chatcheck::cov
