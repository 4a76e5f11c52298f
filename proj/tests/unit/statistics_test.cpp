#include <gtest/gtest.h>

#include <random>
#include <set>

#include "coheval/statistics.hpp"

namespace coheval::stats {
namespace {

// Straight-line MTLD used as an oracle.
double oracle_direction(const std::vector<std::string>& tokens) {
  double factors = 0;
  std::set<std::string> types;
  double count = 0;
  for (const auto& t : tokens) {
    types.insert(t);
    count += 1;
    if (static_cast<double>(types.size()) / count <= 0.72) {
      factors += 1;
      types.clear();
      count = 0;
    }
  }
  if (count > 0) factors += (1 - static_cast<double>(types.size()) / count) / (1 - 0.72);
  return factors > 0 ? static_cast<double>(tokens.size()) / factors : static_cast<double>(tokens.size());
}

double oracle_mtld(const std::vector<std::string>& tokens) {
  const std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
  return (oracle_direction(tokens) + oracle_direction(reversed)) / 2;
}

TEST(Tokenize, LatinWords) {
  const std::vector<std::string> expected = {"hello", "world", "it's", "fine"};
  EXPECT_EQ(tokenize("  Hello, WORLD!  It's fine...", Language("en")), expected);
  EXPECT_EQ(tokenize("Größe ÜBER", Language("de")), (std::vector<std::string>{"größe", "über"}));
  EXPECT_TRUE(tokenize(" -- !! ", Language("en")).empty());
}

TEST(Tokenize, ChineseCharacters) {
  const std::vector<std::string> expected = {"我", "很", "好", "谢", "谢"};
  EXPECT_EQ(tokenize("我很好，谢谢！", Language("zh")), expected);
}

TEST(Mtld, MatchesOracleOnRandomSequences) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const int vocab = std::uniform_int_distribution<int>(1, 50)(rng);
    const int length = std::uniform_int_distribution<int>(1, 400)(rng);
    std::vector<std::string> tokens;
    for (int i = 0; i < length; ++i) tokens.push_back(std::to_string(std::uniform_int_distribution<int>(0, vocab - 1)(rng)));
    EXPECT_NEAR(mtld(tokens), oracle_mtld(tokens), 1e-9) << "trial " << trial;
  }
}

TEST(Mtld, EdgeCases) {
  EXPECT_THROW(mtld(std::vector<std::string>{}), std::invalid_argument);
  EXPECT_EQ(mtld(std::vector<std::string>{"solo"}), 1.0);
  // All distinct: no factor ever closes and the partial factor is 0.
  EXPECT_EQ(mtld(std::vector<std::string>{"a", "b", "c", "d"}), 4.0);
}

ResponsePair pair(const std::string& lang, const std::string& pos, const std::string& neg,
                  const std::string& explanation = "short reason") {
  ResponsePair p;
  p.context_id = lang + "#" + pos;
  p.language = Language(lang);
  p.positive = {pos, explanation};
  p.negative = {neg, explanation + " again"};
  return p;
}

TEST(DatasetStats, ScriptGroupingAndUnits) {
  const std::vector<ResponsePair> pairs = {pair("en", "a b c", "d e"), pair("de", "x y", "z"),
                                           pair("zh", "你好吗", "好")};
  const auto report = dataset_stats(pairs, Grouping::Script);
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_EQ(report.rows[0].subset, "latin");
  EXPECT_EQ(report.rows[0].contexts, 2u);
  EXPECT_DOUBLE_EQ(report.rows[0].response_avg_length, (3 + 2 + 2 + 1) / 4.0);
  EXPECT_DOUBLE_EQ(report.rows[0].explanation_avg_length, (2 + 3 + 2 + 3) / 4.0);
  EXPECT_EQ(report.rows[0].length_unit, "words");
  EXPECT_EQ(report.rows[1].subset, "zh");
  EXPECT_DOUBLE_EQ(report.rows[1].response_avg_length, 2.0);
  EXPECT_EQ(report.rows[1].length_unit, "characters");
}

TEST(DatasetStats, MissingRequestedSubsetWarns) {
  const std::vector<ResponsePair> pairs = {pair("en", "a b", "c")};
  const std::vector<std::string> requested = {"en", "fr"};
  const auto report = dataset_stats(pairs, Grouping::Language, requested);
  ASSERT_EQ(report.rows.size(), 1u);
  ASSERT_EQ(report.warnings.size(), 1u);
  EXPECT_NE(report.warnings[0].find("fr"), std::string::npos);
  EXPECT_FALSE(render_table(report).empty());
}

}  // namespace
}  // namespace coheval::stats
