#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coheval/errors.hpp"
#include "coheval/records.hpp"
#include "coheval/types.hpp"

namespace coheval::metrics {

// Thrown when a correlation has no defined value (a constant side or a
// single label class).
class UndefinedCorrelation : public DataError {
 public:
  using DataError::DataError;
};

// Rows: true {Yes, No}. Columns: predicted {Yes, No, Unparseable}.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, 3>, 2> cells{};

  std::size_t at(Label truth, Verdict predicted) const;
  std::size_t total() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion_matrix(std::span<const Label> labels, std::span<const Verdict> predictions);

// Unweighted mean of the Yes-class and No-class F1. Undefined precision or
// recall counts as 0; Unparseable is always a miss for the true class.
double macro_f1(std::span<const Label> labels, std::span<const Verdict> predictions);
double macro_f1(const ConfusionMatrix& m);

// Score a verdict contributes to correlations: Yes 1, No 0, Unparseable 0.5.
double verdict_score(Verdict v);

struct Correlation {
  double r = 0.0;
  // Two-sided, from Student's t with n - 2 degrees of freedom.
  double p_value = 1.0;
};

Correlation pearson(std::span<const double> x, std::span<const double> y);

// Pearson of the average ranks (ties share the mean rank).
Correlation spearman(std::span<const double> x, std::span<const double> y);

// Pearson between the 0/1 label vector (Yes = 1) and the scores. Requires
// both classes and at least 3 items.
Correlation point_biserial(std::span<const Label> labels, std::span<const double> scores);

struct Correlations {
  Correlation pearson;
  Correlation spearman;
};

Correlations correlations(std::span<const double> human, std::span<const double> model);

// 1-based average ranks.
std::vector<double> average_ranks(std::span<const double> values);

// Corpus BLEU-4: clipped 1..4-gram precisions pooled over the corpus, uniform
// weights, brevity penalty, one reference per hypothesis, no smoothing (any
// zero precision gives 0). Tokens come from stats::tokenize(language).
double corpus_bleu4(std::span<const std::string> hypotheses, std::span<const std::string> references,
                    const Language& language);

// Positive iff strictly more than half of the ratings equal scale_max.
Label binarize_fed(std::span<const int> ratings, int scale_max);

struct JudgeSummary {
  double mean = 0.0;
  double std_dev = 0.0;
  std::size_t judged = 0;
  std::size_t invalid = 0;
  std::string judge_model;
};

struct MetricsReport {
  std::string model_name;
  std::string subset = "all";
  std::size_t n = 0;
  double macro_f1 = 0.0;
  // Absent when undefined (e.g. a constant predictor).
  std::optional<Correlation> point_biserial;
  std::optional<double> bleu4;
  ConfusionMatrix confusion;
  double unparseable_rate = 0.0;
  // Human-annotation mode only.
  std::optional<Correlations> human_correlations;
  std::optional<JudgeSummary> judge;
  std::vector<MetricsReport> per_language;
};

struct HumanAnnotation {
  std::string sample_id;
  std::vector<int> ratings;
  int scale_max = 2;
};

void from_json(const nlohmann::json& j, HumanAnnotation& a);

struct ScoreOptions {
  // When set, labels are replaced by binarize_fed(ratings) and the report
  // carries Pearson/Spearman of the mean rating against the verdict score.
  const std::vector<HumanAnnotation>* human = nullptr;
  bool per_language = true;
};

// Joins predictions to samples by sample_id. Throws DataError on a length
// mismatch or a sample without a prediction.
MetricsReport score_predictions(std::span<const EvalSample> samples, std::span<const Prediction> predictions,
                                const ScoreOptions& options = {});

void to_json(nlohmann::json& j, const ConfusionMatrix& m);
void to_json(nlohmann::json& j, const Correlation& c);
void to_json(nlohmann::json& j, const JudgeSummary& s);
void from_json(const nlohmann::json& j, JudgeSummary& s);
void to_json(nlohmann::json& j, const MetricsReport& r);

// Model rows x {rho_pb, F1, BLEU, judge}, one line per report and per
// language sub-report. BLEU is shown on the 0-100 scale.
std::string render_table(std::span<const MetricsReport> reports);
std::string render_confusion(const ConfusionMatrix& m);

}  // namespace coheval::metrics
