#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chatcheck/common.hpp"
#include "chatcheck/lexicons.hpp"
#include "chatcheck/mathutil.hpp"

namespace chatcheck::meta {

enum class Spelling { kCorrect, kSingleError, kMultipleErrors };
enum class CaseStyle { kAllLower, kAllUpper, kMixed };
enum class Bin { kLow, kMed, kHigh };

inline const char* to_string(Spelling s) {
  switch (s) {
    case Spelling::kCorrect: return "CORRECT";
    case Spelling::kSingleError: return "SINGLE_ERROR";
    case Spelling::kMultipleErrors: return "MULTIPLE_ERRORS";
  }
  return "CORRECT";
}

inline const char* to_string(CaseStyle c) {
  switch (c) {
    case CaseStyle::kAllLower: return "ALL_LOWER";
    case CaseStyle::kAllUpper: return "ALL_UPPER";
    case CaseStyle::kMixed: return "MIXED";
  }
  return "ALL_LOWER";
}

inline const char* to_string(Bin b) {
  switch (b) {
    case Bin::kLow: return "LOW_0_25";
    case Bin::kMed: return "MED_25_75";
    case Bin::kHigh: return "HIGH_75_100";
  }
  return "MED_25_75";
}

struct MetaFeatureVector {
  Spelling spelling = Spelling::kCorrect;
  CaseStyle case_style = CaseStyle::kAllLower;
  bool contractions = false;
  int length = 0;  // whitespace token count
  std::optional<double> complexity;
  std::map<std::string, FeatureValue> extras;
};

// Percentile cutoffs for the LOW/MED/HIGH binning of a numeric meta-feature.
struct BinScheme {
  double p25 = 0.0;
  double p75 = 0.0;
  bool degenerate = false;  // all-ties input; everything bins to MED
};

namespace detail {

// Normalize a raw whitespace token for lexicon lookup: fold the typographic
// apostrophe, lowercase ASCII, strip surrounding punctuation and quotes.
inline std::string normalize_token(std::string_view raw) {
  std::string t;
  t.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    // UTF-8 U+2019 right single quote -> '
    if (i + 2 < raw.size() && static_cast<unsigned char>(raw[i]) == 0xe2 &&
        static_cast<unsigned char>(raw[i + 1]) == 0x80 &&
        static_cast<unsigned char>(raw[i + 2]) == 0x99) {
      t += '\'';
      i += 2;
      continue;
    }
    char c = raw[i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    t += c;
  }
  std::size_t b = 0, e = t.size();
  auto keep = [](char c) { return is_ascii_alpha(c) || is_ascii_digit(c) || c == '\''; };
  while (b < e && !keep(t[b])) ++b;
  while (e > b && !keep(t[e - 1])) --e;
  while (b < e && t[b] == '\'') ++b;
  while (e > b && t[e - 1] == '\'') --e;
  return t.substr(b, e - b);
}

// A token is misspelled when any of its alphabetic parts is out of
// dictionary. Contraction surface forms and possessives are resolved first.
inline bool token_misspelled(const std::string& norm, const Dictionary& dict,
                             const ContractionLexicon& lex) {
  if (norm.empty()) return false;
  if (lex.is_contraction(norm)) return false;
  std::string base = norm;
  if (base.size() > 2 && base.compare(base.size() - 2, 2, "'s") == 0)
    base.resize(base.size() - 2);
  bool has_alpha = false;
  std::string part;
  auto check = [&](const std::string& p) {
    bool alpha = false;
    for (char c : p)
      if (is_ascii_alpha(c)) alpha = true;
    if (!alpha) return false;  // numeric part, not spell-checked
    has_alpha = true;
    return !dict.contains(p);
  };
  for (char c : base) {
    if (is_ascii_alpha(c) || is_ascii_digit(c)) {
      part += c;
    } else {
      if (check(part)) return true;
      part.clear();
    }
  }
  if (check(part)) return true;
  (void)has_alpha;
  return false;
}

inline bool token_has_alpha(const std::string& norm) {
  for (char c : norm)
    if (is_ascii_alpha(c)) return true;
  return false;
}

}  // namespace detail

// Natural-language-variation meta-features of a single utterance.
// Spelling counts out-of-dictionary alphabetic tokens (0 / 1 / 2+), case is
// judged over ASCII alphabetic characters only, contraction detection matches
// the lexicon's surface forms, and length is the whitespace token count.
inline MetaFeatureVector extract(std::string_view text, const Dictionary& dict,
                                 const ContractionLexicon& lex) {
  if (trim(text).empty()) throw DataError("empty text");
  MetaFeatureVector mfv;
  const auto tokens = split_ws(text);
  mfv.length = static_cast<int>(tokens.size());
  int misspelled = 0;
  for (const auto& raw : tokens) {
    const std::string norm = detail::normalize_token(raw);
    if (norm.empty()) continue;
    if (lex.is_contraction(norm)) {
      mfv.contractions = true;
      continue;
    }
    if (detail::token_has_alpha(norm) && detail::token_misspelled(norm, dict, lex)) ++misspelled;
  }
  mfv.spelling = misspelled == 0   ? Spelling::kCorrect
                 : misspelled == 1 ? Spelling::kSingleError
                                   : Spelling::kMultipleErrors;
  bool any_upper = false, any_lower = false;
  for (char c : text) {
    if (c >= 'A' && c <= 'Z') any_upper = true;
    if (c >= 'a' && c <= 'z') any_lower = true;
  }
  mfv.case_style = (any_upper && any_lower) ? CaseStyle::kMixed
                   : any_upper              ? CaseStyle::kAllUpper
                                            : CaseStyle::kAllLower;
  return mfv;
}

// Empirical 25th/75th percentile cutoffs (linear interpolation). All-equal
// inputs produce a degenerate scheme where every value bins to MED.
inline BinScheme fit_bins(std::vector<double> values) {
  if (values.size() < 4)
    throw DataError("fit_bins needs at least 4 values, got " + std::to_string(values.size()));
  std::sort(values.begin(), values.end());
  BinScheme scheme;
  scheme.p25 = percentile_linear(values, 0.25);
  scheme.p75 = percentile_linear(values, 0.75);
  scheme.degenerate = scheme.p25 == scheme.p75;
  return scheme;
}

// Boundary values are inclusive to MED.
inline Bin bin_value(double value, const BinScheme& scheme) {
  if (scheme.p25 > scheme.p75) throw ConfigError("invalid bin scheme (p25 > p75)");
  if (value < scheme.p25) return Bin::kLow;
  if (value > scheme.p75) return Bin::kHigh;
  return Bin::kMed;
}

}  // namespace chatcheck::meta
