#include <gtest/gtest.h>

#include "coheval/metrics.hpp"

namespace coheval::metrics {
namespace {

using nlohmann::json;

TEST(MacroF1, SmallHandExample) {
  const std::vector<Label> labels = {Label::Yes, Label::Yes, Label::No, Label::No};
  const std::vector<Verdict> predicted = {Verdict::Yes, Verdict::No, Verdict::No, Verdict::No};
  // Yes: P 1, R 1/2, F1 2/3. No: P 2/3, R 1, F1 4/5.
  EXPECT_NEAR(macro_f1(labels, predicted), (2.0 / 3.0 + 0.8) / 2.0, 1e-12);
}

TEST(MacroF1, UnparseableIsAlwaysAMiss) {
  const std::vector<Label> labels = {Label::Yes, Label::No};
  // Yes has no true positive; the No class is perfect.
  EXPECT_NEAR(macro_f1(labels, std::vector<Verdict>{Verdict::Unparseable, Verdict::No}), 0.5, 1e-12);
  EXPECT_EQ(macro_f1(labels, std::vector<Verdict>{Verdict::Unparseable, Verdict::Unparseable}), 0.0);
}

TEST(Confusion, CountsEveryCell) {
  // 100 positives and 100 negatives: 17 false positives, 83 false negatives,
  // 5 unparseable among the positives.
  std::vector<Label> labels;
  std::vector<Verdict> predicted;
  for (int i = 0; i < 100; ++i) {
    labels.push_back(Label::Yes);
    predicted.push_back(i < 83 ? Verdict::No : i < 88 ? Verdict::Unparseable : Verdict::Yes);
  }
  for (int i = 0; i < 100; ++i) {
    labels.push_back(Label::No);
    predicted.push_back(i < 17 ? Verdict::Yes : Verdict::No);
  }
  const auto m = confusion_matrix(labels, predicted);
  EXPECT_EQ(m.at(Label::Yes, Verdict::Yes), 12u);
  EXPECT_EQ(m.at(Label::Yes, Verdict::No), 83u);
  EXPECT_EQ(m.at(Label::Yes, Verdict::Unparseable), 5u);
  EXPECT_EQ(m.at(Label::No, Verdict::Yes), 17u);
  EXPECT_EQ(m.at(Label::No, Verdict::No), 83u);
  EXPECT_EQ(m.total(), 200u);
  const double f1_yes = 2.0 * 12 / (2.0 * 12 + 17 + 88);
  const double f1_no = 2.0 * 83 / (2.0 * 83 + 83 + 17);
  EXPECT_NEAR(macro_f1(m), (f1_yes + f1_no) / 2, 1e-12);
  EXPECT_EQ(json(m).at("cells"), json({{12, 83, 5}, {17, 83, 0}}));
}

TEST(Correlation, PValuesMatchReferenceValues) {
  const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8};
  const std::vector<double> y = {2, 1, 4, 3, 7, 8, 6, 5};
  auto c = pearson(x, y);
  EXPECT_NEAR(c.r, 0.738095238095238, 1e-12);
  EXPECT_NEAR(c.p_value, 0.03655276105286082, 1e-9);

  c = spearman(std::vector<double>{1, 2, 2, 3, 4, 5}, std::vector<double>{1, 3, 2, 2, 5, 4});
  EXPECT_NEAR(c.r, 0.8088235294117647, 1e-12);
  EXPECT_NEAR(c.p_value, 0.051329063199674334, 1e-9);

  const std::vector<Label> labels = {Label::Yes, Label::Yes, Label::Yes, Label::No,
                                     Label::No,  Label::No,  Label::Yes, Label::No};
  c = point_biserial(labels, std::vector<double>{1, 0.5, 1, 0, 0, 1, 1, 0});
  EXPECT_NEAR(c.r, 0.674199862463242, 1e-12);
  EXPECT_NEAR(c.p_value, 0.066706801962041, 1e-9);
}

TEST(Correlation, UndefinedCases) {
  const std::vector<double> constant = {1, 1, 1, 1};
  const std::vector<double> varying = {1, 2, 3, 4};
  EXPECT_THROW(pearson(constant, varying), UndefinedCorrelation);
  EXPECT_THROW(spearman(varying, constant), UndefinedCorrelation);
  EXPECT_THROW(pearson(std::vector<double>{1, 2}, std::vector<double>{2, 1}), UndefinedCorrelation);
  const std::vector<Label> one_class(4, Label::No);
  EXPECT_THROW(point_biserial(one_class, varying), UndefinedCorrelation);
  EXPECT_THROW(pearson(varying, std::vector<double>{1, 2}), DataError);
}

TEST(Ranks, TiesShareTheMeanRank) {
  EXPECT_EQ(average_ranks(std::vector<double>{10, 20, 20, 5}), (std::vector<double>{2, 3.5, 3.5, 1}));
}

TEST(Bleu, BrevityPenaltyAndCharacters) {
  const Language en("en");
  const std::vector<std::string> refs = {"one two three four five six seven eight"};
  const std::vector<std::string> short_hyp = {"one two three four"};
  EXPECT_NEAR(corpus_bleu4(short_hyp, refs, en), std::exp(1.0 - 8.0 / 4.0), 1e-12);
  const std::vector<std::string> tiny = {"one two"};
  EXPECT_EQ(corpus_bleu4(tiny, refs, en), 0.0);
  const std::vector<std::string> zh = {"我今天很开心"};
  EXPECT_EQ(corpus_bleu4(zh, zh, Language("zh")), 1.0);
  EXPECT_EQ(corpus_bleu4(refs, refs, en), 1.0);
}

TEST(Fed, StrictMajorityOfTopRatings) {
  EXPECT_EQ(binarize_fed(std::vector<int>{2, 2, 1}, 2), Label::Yes);
  EXPECT_EQ(binarize_fed(std::vector<int>{2, 1}, 2), Label::No);
  EXPECT_EQ(binarize_fed(std::vector<int>{4, 4, 4, 3, 0}, 4), Label::Yes);
  EXPECT_EQ(binarize_fed(std::vector<int>{3, 3, 3}, 4), Label::No);
  EXPECT_THROW(binarize_fed(std::vector<int>{5}, 4), DataError);
}

EvalSample sample(const std::string& id, Label label, const char* lang = "en") {
  return {id, Language(lang), {{Speaker::A, "a"}, {Speaker::B, "b"}}, "c", label, std::string("ref explanation here ok")};
}

Prediction prediction(const std::string& id, Verdict v) {
  return {id, v, "ref explanation here ok", "raw", "model-x", {}};
}

TEST(Score, JoinsByIdAndSplitsLanguages) {
  const std::vector<EvalSample> samples = {sample("1", Label::Yes), sample("2", Label::No),
                                           sample("3", Label::Yes, "de"), sample("4", Label::No, "de")};
  const std::vector<Prediction> predictions = {prediction("4", Verdict::No), prediction("3", Verdict::Yes),
                                               prediction("2", Verdict::Yes), prediction("1", Verdict::Yes)};
  const auto report = score_predictions(samples, predictions);
  EXPECT_EQ(report.model_name, "model-x");
  EXPECT_EQ(report.n, 4u);
  ASSERT_EQ(report.per_language.size(), 2u);
  EXPECT_EQ(report.per_language[0].subset, "de");
  EXPECT_EQ(report.per_language[0].macro_f1, 1.0);
  EXPECT_EQ(report.bleu4, 1.0);
  const json j = report;
  EXPECT_EQ(j.at("per_language").size(), 2u);
  EXPECT_TRUE(j.at("judge").is_null());

  const std::vector<Prediction> missing = {prediction("1", Verdict::Yes), prediction("2", Verdict::No),
                                           prediction("3", Verdict::No), prediction("9", Verdict::No)};
  EXPECT_THROW(score_predictions(samples, missing), DataError);
}

TEST(Score, HumanAnnotationMode) {
  std::vector<EvalSample> samples;
  std::vector<Prediction> predictions;
  std::vector<HumanAnnotation> human;
  const std::vector<std::vector<int>> ratings = {{2, 2, 2}, {2, 2, 1}, {1, 1, 2}, {0, 0, 1}, {2, 1, 1}};
  const std::vector<Verdict> verdicts = {Verdict::Yes, Verdict::Yes, Verdict::No, Verdict::No, Verdict::Yes};
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    const auto id = "f" + std::to_string(i);
    samples.push_back(sample(id, Label::No));
    predictions.push_back(prediction(id, verdicts[i]));
    human.push_back({id, ratings[i], 2});
  }
  ScoreOptions options;
  options.human = &human;
  const auto report = score_predictions(samples, predictions, options);
  // Binarized labels: Yes, Yes, No, No, No.
  EXPECT_EQ(report.confusion.at(Label::Yes, Verdict::Yes), 2u);
  EXPECT_EQ(report.confusion.at(Label::No, Verdict::Yes), 1u);
  ASSERT_TRUE(report.human_correlations.has_value());
  const std::vector<double> means = {2, 5.0 / 3, 4.0 / 3, 1.0 / 3, 4.0 / 3};
  const std::vector<double> scores = {1, 1, 0, 0, 1};
  EXPECT_NEAR(report.human_correlations->pearson.r, pearson(means, scores).r, 1e-12);
}

TEST(Render, TableShowsNaNForUndefinedCorrelation) {
  MetricsReport r;
  r.model_name = "always-yes";
  r.macro_f1 = 1.0 / 3.0;
  r.bleu4 = 0.25;
  const std::vector<MetricsReport> reports = {r};
  const auto table = render_table(reports);
  EXPECT_NE(table.find("always-yes"), std::string::npos);
  EXPECT_NE(table.find("NaN"), std::string::npos);
  EXPECT_NE(table.find("0.333"), std::string::npos);
  EXPECT_NE(table.find("25.0"), std::string::npos);
}

}  // namespace
}  // namespace coheval::metrics
