#include "coheval/statistics.hpp"

#include "coheval/unicode.hpp"

#include <fmt/format.h>

#include <map>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace coheval::stats {
namespace {

template <typename It>
double mtld_pass(It first, It last, std::size_t n, double threshold) {
  double factors = 0.0;
  std::unordered_set<std::string_view> types;
  std::size_t count = 0;
  for (; first != last; ++first) {
    types.insert(*first);
    ++count;
    const double ttr = static_cast<double>(types.size()) / static_cast<double>(count);
    if (ttr <= threshold) {
      factors += 1.0;
      types.clear();
      count = 0;
    }
  }
  if (count > 0) {
    const double ttr = static_cast<double>(types.size()) / static_cast<double>(count);
    factors += (1.0 - ttr) / (1.0 - threshold);
  }
  if (factors == 0.0) return static_cast<double>(n);
  return static_cast<double>(n) / factors;
}

struct Accumulator {
  std::set<std::string> context_ids;
  std::size_t responses = 0;
  std::size_t response_tokens = 0;
  std::size_t explanations = 0;
  std::size_t explanation_tokens = 0;
  std::vector<std::string> stream;
  bool all_character = true;
};

}  // namespace

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& piece : text::split_whitespace(text::to_lower(text::nfc(text)))) {
    auto token = text::strip_punctuation(piece);
    if (!token.empty()) out.push_back(std::move(token));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text, const Language& language) {
  if (language.uses_character_tokens()) return text::content_characters(text::nfc(text));
  return word_tokens(text);
}

double mtld(std::span<const std::string> tokens, double ttr_threshold) {
  if (tokens.empty()) throw std::invalid_argument("mtld of an empty token sequence");
  const auto n = tokens.size();
  const double forward = mtld_pass(tokens.begin(), tokens.end(), n, ttr_threshold);
  const double backward = mtld_pass(tokens.rbegin(), tokens.rend(), n, ttr_threshold);
  return (forward + backward) / 2.0;
}

std::string subset_name(const ResponsePair& p, Grouping grouping) {
  switch (grouping) {
    case Grouping::All:
      return "all";
    case Grouping::Language:
      return p.language.code();
    case Grouping::Script:
      return p.language.uses_character_tokens() ? p.language.code() : "latin";
  }
  return "all";
}

StatsReport dataset_stats(std::span<const ResponsePair> pairs, Grouping grouping,
                          std::span<const std::string> requested) {
  return dataset_stats(
      pairs, [grouping](const ResponsePair& p) { return subset_name(p, grouping); }, requested);
}

StatsReport dataset_stats(std::span<const ResponsePair> pairs, const SubsetOf& subset_of,
                          std::span<const std::string> requested) {
  std::map<std::string, Accumulator> subsets;
  for (const auto& pair : pairs) {
    auto& acc = subsets[subset_of(pair)];
    acc.context_ids.insert(pair.context_id);
    acc.all_character = acc.all_character && pair.language.uses_character_tokens();
    for (const auto* side : {&pair.positive, &pair.negative}) {
      auto tokens = tokenize(side->response, pair.language);
      acc.responses += 1;
      acc.response_tokens += tokens.size();
      acc.stream.insert(acc.stream.end(), std::make_move_iterator(tokens.begin()),
                        std::make_move_iterator(tokens.end()));
      acc.explanations += 1;
      acc.explanation_tokens += word_tokens(side->explanation).size();
    }
  }

  StatsReport report;
  for (const auto& name : requested) {
    if (!subsets.contains(name)) report.warnings.push_back("subset '" + name + "' is empty; row omitted");
  }
  for (auto& [name, acc] : subsets) {
    StatsRow row;
    row.subset = name;
    row.contexts = acc.context_ids.size();
    row.response_avg_length = static_cast<double>(acc.response_tokens) / static_cast<double>(acc.responses);
    row.explanation_avg_length =
        static_cast<double>(acc.explanation_tokens) / static_cast<double>(acc.explanations);
    row.length_unit = acc.all_character ? "characters" : "words";
    if (acc.stream.empty()) {
      report.warnings.push_back("subset '" + name + "' has no response tokens; MTLD reported as 0");
    } else {
      row.response_mtld = mtld(acc.stream);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

void to_json(nlohmann::json& j, const StatsRow& row) {
  j = nlohmann::json{{"subset", row.subset},
                     {"contexts", row.contexts},
                     {"response_avg_length", row.response_avg_length},
                     {"explanation_avg_length", row.explanation_avg_length},
                     {"response_mtld", row.response_mtld},
                     {"length_unit", row.length_unit}};
}

void to_json(nlohmann::json& j, const StatsReport& report) {
  j = nlohmann::json{{"rows", report.rows}, {"warnings", report.warnings}};
}

std::string render_table(const StatsReport& report) {
  std::size_t width = 6;
  for (const auto& row : report.rows) width = std::max(width, row.subset.size());
  std::string out = fmt::format("{:<{}}  {:>10}  {:>14}  {:>14}  {:>10}  {}\n", "Subset", width,
                                "# contexts", "Response len", "Explan. len", "MTLD", "unit");
  for (const auto& row : report.rows) {
    out += fmt::format("{:<{}}  {:>10}  {:>14.2f}  {:>14.2f}  {:>10.2f}  {}\n", row.subset, width,
                       row.contexts, row.response_avg_length, row.explanation_avg_length, row.response_mtld,
                       row.length_unit);
  }
  return out;
}

}  // namespace coheval::stats
