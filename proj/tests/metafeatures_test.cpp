#include "chatcheck/metafeatures.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "chatcheck/rng.hpp"

using namespace chatcheck;
using namespace chatcheck::meta;

namespace {

Dictionary small_dictionary() {
  Dictionary d = Dictionary::bundled();
  return d;
}

const ContractionLexicon& lex() {
  static const ContractionLexicon instance = ContractionLexicon::bundled();
  return instance;
}

// Independent percentile oracle: same linear-interpolation convention,
// written directly from the rank formula.
double percentile_oracle(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] * (1.0 - (h - static_cast<double>(lo))) +
         values[lo + 1] * (h - static_cast<double>(lo));
}

}  // namespace

TEST(Extract, PaperExampleContractionAndMixedCase) {
  const auto mfv = extract("I can't connect at all!", small_dictionary(), lex());
  EXPECT_TRUE(mfv.contractions);
  EXPECT_EQ(mfv.case_style, CaseStyle::kMixed);
  EXPECT_EQ(mfv.spelling, Spelling::kCorrect);
  EXPECT_EQ(mfv.length, 5);
}

TEST(Extract, CleanLowercase) {
  const auto mfv = extract("hello there", small_dictionary(), lex());
  EXPECT_EQ(mfv.spelling, Spelling::kCorrect);
  EXPECT_EQ(mfv.case_style, CaseStyle::kAllLower);
  EXPECT_FALSE(mfv.contractions);
  EXPECT_EQ(mfv.length, 2);
}

TEST(Extract, TwoOutOfDictionaryTokens) {
  // Dictionary-lookup oracle: "acount" and "bloked" are out of dictionary,
  // "my" and "is" are in.
  Dictionary d = small_dictionary();
  EXPECT_TRUE(d.contains("my"));
  EXPECT_TRUE(d.contains("is"));
  EXPECT_FALSE(d.contains("acount"));
  EXPECT_FALSE(d.contains("bloked"));
  const auto mfv = extract("my acount is bloked", d, lex());
  EXPECT_EQ(mfv.spelling, Spelling::kMultipleErrors);
}

TEST(Extract, SingleErrorAndUpperCase) {
  const auto mfv = extract("MY ACOUNT IS BLOCKED", small_dictionary(), lex());
  EXPECT_EQ(mfv.spelling, Spelling::kSingleError);
  EXPECT_EQ(mfv.case_style, CaseStyle::kAllUpper);
}

TEST(Extract, EmptyTextIsAnError) {
  EXPECT_THROW(extract("   ", small_dictionary(), lex()), DataError);
}

TEST(Extract, PureFunction) {
  const auto a = extract("I'm LOCKED out!", small_dictionary(), lex());
  const auto b = extract("I'm LOCKED out!", small_dictionary(), lex());
  EXPECT_EQ(a.spelling, b.spelling);
  EXPECT_EQ(a.case_style, b.case_style);
  EXPECT_EQ(a.contractions, b.contractions);
  EXPECT_EQ(a.length, b.length);
}

TEST(Extract, PunctuationAndPossessives) {
  const auto mfv = extract("where's my card's pin?", small_dictionary(), lex());
  EXPECT_TRUE(mfv.contractions);  // where's
  EXPECT_EQ(mfv.spelling, Spelling::kCorrect);  // card's -> card
}

TEST(FitBins, OneToHundred) {
  std::vector<double> values;
  for (int i = 1; i <= 100; ++i) values.push_back(i);
  const auto scheme = fit_bins(values);
  EXPECT_NEAR(scheme.p25, 25.75, 1e-12);
  EXPECT_NEAR(scheme.p75, 75.25, 1e-12);
  EXPECT_FALSE(scheme.degenerate);
}

TEST(FitBins, MatchesIndependentOracle) {
  const std::vector<double> values{0, 10, 20, 30};
  const auto scheme = fit_bins(values);
  EXPECT_NEAR(scheme.p25, percentile_oracle(values, 0.25), 1e-9);
  EXPECT_NEAR(scheme.p75, percentile_oracle(values, 0.75), 1e-9);
  SplitMix64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> random_values;
    for (int i = 0; i < 50 + trial; ++i) random_values.push_back(rng.gaussian() * 10.0);
    const auto s = fit_bins(random_values);
    EXPECT_NEAR(s.p25, percentile_oracle(random_values, 0.25), 1e-9);
    EXPECT_NEAR(s.p75, percentile_oracle(random_values, 0.75), 1e-9);
  }
}

TEST(FitBins, AllTiesIsDegenerateAndBinsToMed) {
  const auto scheme = fit_bins({7, 7, 7, 7, 7});
  EXPECT_TRUE(scheme.degenerate);
  EXPECT_EQ(bin_value(7, scheme), Bin::kMed);
  EXPECT_EQ(bin_value(6, scheme), Bin::kLow);
}

TEST(FitBins, TooFewValues) {
  EXPECT_THROW(fit_bins({1, 2, 3}), DataError);
}

TEST(BinValue, BoundariesGoToMed) {
  BinScheme scheme{25.75, 75.25, false};
  EXPECT_EQ(bin_value(10, scheme), Bin::kLow);
  EXPECT_EQ(bin_value(50, scheme), Bin::kMed);
  EXPECT_EQ(bin_value(25.75, scheme), Bin::kMed);
  EXPECT_EQ(bin_value(75.25, scheme), Bin::kMed);
  EXPECT_EQ(bin_value(75.26, scheme), Bin::kHigh);
}

TEST(BinValue, Monotone) {
  SplitMix64 rng(17);
  std::vector<double> values;
  for (int i = 0; i < 200; ++i) values.push_back(rng.uniform() * 100.0);
  const auto scheme = fit_bins(values);
  for (int i = 0; i < 500; ++i) {
    const double a = rng.uniform() * 120.0 - 10.0;
    const double b = a + rng.uniform() * 20.0;
    EXPECT_LE(static_cast<int>(bin_value(a, scheme)), static_cast<int>(bin_value(b, scheme)));
  }
}

TEST(BinValue, PopulationSharesOnTieFreeData) {
  SplitMix64 rng(23);
  std::vector<double> values;
  for (int i = 0; i < 2000; ++i) values.push_back(rng.uniform());
  const auto scheme = fit_bins(values);
  int low = 0, med = 0, high = 0;
  for (double v : values) {
    switch (bin_value(v, scheme)) {
      case Bin::kLow: ++low; break;
      case Bin::kMed: ++med; break;
      case Bin::kHigh: ++high; break;
    }
  }
  const double n = static_cast<double>(values.size());
  EXPECT_NEAR(low / n, 0.25, 0.02);
  EXPECT_NEAR(med / n, 0.50, 0.02);
  EXPECT_NEAR(high / n, 0.25, 0.02);
}

TEST(Dictionary, LoadAndAugment) {
  testing::internal::CaptureStdout();  // keep output clean if any
  testing::internal::GetCapturedStdout();
  Dictionary d = Dictionary::bundled();
  EXPECT_GT(d.size(), 500u);
  EXPECT_FALSE(d.contains("zorbltraq"));
  d.add_text_vocabulary("The Zorbltraq-5000 is amazing");
  EXPECT_TRUE(d.contains("zorbltraq"));
}
