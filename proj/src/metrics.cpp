#include "coheval/metrics.hpp"

#include "coheval/statistics.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace coheval::metrics {
namespace {

std::size_t row_of(Label l) { return l == Label::Yes ? 0 : 1; }

std::size_t column_of(Verdict v) {
  switch (v) {
    case Verdict::Yes:
      return 0;
    case Verdict::No:
      return 1;
    case Verdict::Unparseable:
      return 2;
  }
  return 2;
}

double f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

constexpr double kCollinearSlack = 1e-12;

double two_sided_p(double r, std::size_t n) {
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = r * std::sqrt(df / ((1.0 - r) * (1.0 + r)));
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DataError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " + std::to_string(b) +
                    ")");
  }
}

using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts ngrams(const std::vector<std::string>& tokens, std::size_t order) {
  NgramCounts counts;
  if (tokens.size() < order) return counts;
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < order; ++k) {
      if (k) key.push_back('\x1f');
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

std::string format_correlation(const std::optional<Correlation>& c) {
  return c ? fmt::format("{:.4f}", c->r) : std::string("NaN");
}

}  // namespace

std::size_t ConfusionMatrix::at(Label truth, Verdict predicted) const {
  return cells[row_of(truth)][column_of(predicted)];
}

std::size_t ConfusionMatrix::total() const {
  std::size_t sum = 0;
  for (const auto& row : cells) sum = std::accumulate(row.begin(), row.end(), sum);
  return sum;
}

ConfusionMatrix confusion_matrix(std::span<const Label> labels, std::span<const Verdict> predictions) {
  check_lengths(labels.size(), predictions.size(), "confusion_matrix");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < labels.size(); ++i) ++m.cells[row_of(labels[i])][column_of(predictions[i])];
  return m;
}

double macro_f1(const ConfusionMatrix& m) {
  const auto& c = m.cells;
  const double yes = f1(c[0][0], c[1][0], c[0][1] + c[0][2]);
  const double no = f1(c[1][1], c[0][1], c[1][0] + c[1][2]);
  return (yes + no) / 2.0;
}

double macro_f1(std::span<const Label> labels, std::span<const Verdict> predictions) {
  check_lengths(labels.size(), predictions.size(), "macro_f1");
  if (labels.empty()) throw DataError("macro_f1: no samples");
  return macro_f1(confusion_matrix(labels, predictions));
}

double verdict_score(Verdict v) {
  switch (v) {
    case Verdict::Yes:
      return 1.0;
    case Verdict::No:
      return 0.0;
    case Verdict::Unparseable:
      return 0.5;
  }
  return 0.5;
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  check_lengths(x.size(), y.size(), "pearson");
  const auto n = x.size();
  if (n < 3) throw UndefinedCorrelation("correlation needs at least 3 items, got " + std::to_string(n));
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelation("correlation is undefined for a constant input");
  double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  // Exactly collinear inputs land a few ulps short of +-1.
  if (1.0 - std::abs(r) < kCollinearSlack) r = std::copysign(1.0, r);
  return {r, two_sided_p(r, n)};
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  check_lengths(x.size(), y.size(), "spearman");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

Correlation point_biserial(std::span<const Label> labels, std::span<const double> scores) {
  check_lengths(labels.size(), scores.size(), "point_biserial");
  std::vector<double> binary(labels.size());
  std::size_t positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    binary[i] = labels[i] == Label::Yes ? 1.0 : 0.0;
    positives += labels[i] == Label::Yes ? 1 : 0;
  }
  if (positives == 0 || positives == labels.size()) {
    throw UndefinedCorrelation("point-biserial correlation needs both label classes");
  }
  return pearson(binary, scores);
}

Correlations correlations(std::span<const double> human, std::span<const double> model) {
  return {pearson(human, model), spearman(human, model)};
}

double corpus_bleu4(std::span<const std::string> hypotheses, std::span<const std::string> references,
                    const Language& language) {
  check_lengths(hypotheses.size(), references.size(), "corpus_bleu4");
  if (hypotheses.empty()) throw DataError("corpus_bleu4: no hypotheses");
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto hyp = stats::tokenize(hypotheses[i], language);
    const auto ref = stats::tokenize(references[i], language);
    hyp_length += hyp.size();
    ref_length += ref.size();
    for (std::size_t order = 1; order <= 4; ++order) {
      const auto hyp_counts = ngrams(hyp, order);
      const auto ref_counts = ngrams(ref, order);
      for (const auto& [gram, count] : hyp_counts) {
        totals[order - 1] += count;
        if (auto it = ref_counts.find(gram); it != ref_counts.end()) matches[order - 1] += std::min(count, it->second);
      }
    }
  }
  if (hyp_length == 0) return 0.0;
  double log_precision = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    if (totals[k] == 0 || matches[k] == 0) return 0.0;
    log_precision += 0.25 * std::log(static_cast<double>(matches[k]) / static_cast<double>(totals[k]));
  }
  const double brevity =
      hyp_length > ref_length ? 1.0
                              : std::exp(1.0 - static_cast<double>(ref_length) / static_cast<double>(hyp_length));
  return brevity * std::exp(log_precision);
}

Label binarize_fed(std::span<const int> ratings, int scale_max) {
  if (ratings.empty()) throw DataError("binarize_fed: no annotations");
  std::size_t top = 0;
  for (int r : ratings) {
    if (r < 0 || r > scale_max) {
      throw DataError("binarize_fed: rating " + std::to_string(r) + " outside [0, " + std::to_string(scale_max) +
                      "]");
    }
    top += r == scale_max ? 1 : 0;
  }
  return 2 * top > ratings.size() ? Label::Yes : Label::No;
}

void from_json(const nlohmann::json& j, HumanAnnotation& a) {
  a.sample_id = j.at("sample_id").get<std::string>();
  a.ratings = j.at("ratings").get<std::vector<int>>();
  a.scale_max = j.value("scale_max", 2);
}

MetricsReport score_predictions(std::span<const EvalSample> samples, std::span<const Prediction> predictions,
                                const ScoreOptions& options) {
  check_lengths(samples.size(), predictions.size(), "score_predictions");
  if (samples.empty()) throw DataError("score_predictions: no samples");

  std::unordered_map<std::string_view, const Prediction*> by_id;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.sample_id, &p).second) throw DataError("duplicate prediction for '" + p.sample_id + "'");
  }
  std::unordered_map<std::string_view, const HumanAnnotation*> human_by_id;
  if (options.human != nullptr) {
    for (const auto& a : *options.human) human_by_id.emplace(a.sample_id, &a);
  }

  std::vector<Label> labels;
  std::vector<Verdict> verdicts;
  std::vector<double> scores;
  std::vector<double> human_means;
  std::vector<std::string> hypotheses;
  std::vector<std::string> references;
  MetricsReport report;
  for (const auto& sample : samples) {
    const auto it = by_id.find(sample.sample_id);
    if (it == by_id.end()) throw DataError("no prediction for sample '" + sample.sample_id + "'");
    const auto& p = *it->second;
    if (report.model_name.empty()) report.model_name = p.model_name;
    Label label = sample.label;
    if (options.human != nullptr) {
      const auto h = human_by_id.find(sample.sample_id);
      if (h == human_by_id.end()) throw DataError("no human annotation for sample '" + sample.sample_id + "'");
      label = binarize_fed(h->second->ratings, h->second->scale_max);
      const auto& r = h->second->ratings;
      human_means.push_back(std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size()));
    }
    labels.push_back(label);
    verdicts.push_back(p.verdict);
    scores.push_back(verdict_score(p.verdict));
    if (sample.reference_explanation) {
      hypotheses.push_back(p.explanation);
      references.push_back(*sample.reference_explanation);
    }
  }

  report.n = samples.size();
  report.confusion = confusion_matrix(labels, verdicts);
  report.macro_f1 = macro_f1(report.confusion);
  try {
    report.point_biserial = point_biserial(labels, scores);
  } catch (const UndefinedCorrelation&) {
    report.point_biserial.reset();
  }
  if (!hypotheses.empty()) report.bleu4 = corpus_bleu4(hypotheses, references, Language("en"));
  report.unparseable_rate =
      static_cast<double>(report.confusion.cells[0][2] + report.confusion.cells[1][2]) / static_cast<double>(report.n);
  if (options.human != nullptr) {
    try {
      report.human_correlations = correlations(human_means, scores);
    } catch (const UndefinedCorrelation&) {
      report.human_correlations.reset();
    }
  }

  if (options.per_language) {
    std::map<Language, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < samples.size(); ++i) groups[samples[i].language].push_back(i);
    if (groups.size() > 1) {
      for (const auto& [language, indices] : groups) {
        std::vector<EvalSample> sub_samples;
        std::vector<Prediction> sub_predictions;
        for (auto i : indices) {
          sub_samples.push_back(samples[i]);
          sub_predictions.push_back(*by_id.at(samples[i].sample_id));
        }
        ScoreOptions sub_options = options;
        sub_options.per_language = false;
        auto sub = score_predictions(sub_samples, sub_predictions, sub_options);
        sub.subset = language.code();
        report.per_language.push_back(std::move(sub));
      }
    }
  }
  return report;
}

void to_json(nlohmann::json& j, const ConfusionMatrix& m) {
  j = nlohmann::json{{"rows", {"Yes", "No"}},
                     {"columns", {"Yes", "No", "Unparseable"}},
                     {"cells", m.cells}};
}

void to_json(nlohmann::json& j, const Correlation& c) { j = nlohmann::json{{"r", c.r}, {"p_value", c.p_value}}; }

void to_json(nlohmann::json& j, const JudgeSummary& s) {
  j = nlohmann::json{{"mean", s.mean},
                     {"std", s.std_dev},
                     {"judged", s.judged},
                     {"invalid", s.invalid},
                     {"judge_model", s.judge_model}};
}

void from_json(const nlohmann::json& j, JudgeSummary& s) {
  s.mean = j.at("mean").get<double>();
  s.std_dev = j.at("std").get<double>();
  s.judged = j.at("judged").get<std::size_t>();
  s.invalid = j.at("invalid").get<std::size_t>();
  s.judge_model = j.value("judge_model", std::string{});
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
  j = nlohmann::json{{"model_name", r.model_name},
                     {"subset", r.subset},
                     {"n", r.n},
                     {"macro_f1", r.macro_f1},
                     {"point_biserial", nullptr},
                     {"bleu4", nullptr},
                     {"confusion", r.confusion},
                     {"unparseable_rate", r.unparseable_rate},
                     {"human_correlations", nullptr},
                     {"judge", nullptr},
                     {"per_language", r.per_language}};
  if (r.point_biserial) j["point_biserial"] = *r.point_biserial;
  if (r.bleu4) j["bleu4"] = *r.bleu4;
  if (r.human_correlations) {
    j["human_correlations"] = {{"pearson", r.human_correlations->pearson},
                               {"spearman", r.human_correlations->spearman}};
  }
  if (r.judge) j["judge"] = *r.judge;
}

std::string render_table(std::span<const MetricsReport> reports) {
  std::size_t width = 5;
  for (const auto& r : reports) width = std::max(width, r.model_name.size());
  std::string out = fmt::format("{:<{}}  {:<8}  {:>6}  {:>8}  {:>6}  {:>6}  {:>11}\n", "Model", width, "Subset", "n",
                                "rho_pb", "F1", "BLEU", "Judge");
  auto line = [&](const MetricsReport& r) {
    const auto bleu = r.bleu4 ? fmt::format("{:.2f}", *r.bleu4 * 100.0) : std::string("-");
    const auto judge = r.judge ? fmt::format("{:.2f}±{:.2f}", r.judge->mean, r.judge->std_dev) : std::string("-");
    out += fmt::format("{:<{}}  {:<8}  {:>6}  {:>8}  {:>6.3f}  {:>6}  {:>11}\n", r.model_name, width, r.subset, r.n,
                       format_correlation(r.point_biserial), r.macro_f1, bleu, judge);
  };
  for (const auto& r : reports) {
    line(r);
    for (const auto& sub : r.per_language) line(sub);
  }
  return out;
}

std::string render_confusion(const ConfusionMatrix& m) {
  std::string out = fmt::format("{:<10}{:>8}{:>8}{:>13}\n", "true\\pred", "Yes", "No", "Unparseable");
  out += fmt::format("{:<10}{:>8}{:>8}{:>13}\n", "Yes", m.cells[0][0], m.cells[0][1], m.cells[0][2]);
  out += fmt::format("{:<10}{:>8}{:>8}{:>13}\n", "No", m.cells[1][0], m.cells[1][1], m.cells[1][2]);
  return out;
}

}  // namespace coheval::metrics
