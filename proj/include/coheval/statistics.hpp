#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "coheval/records.hpp"
#include "coheval/types.hpp"

namespace coheval::stats {

// Word tokens for delimited scripts (lowercased, edge punctuation and
// symbols stripped); one token per content character for zh.
std::vector<std::string> tokenize(std::string_view text, const Language& language);

// Word tokenization regardless of language. Explanations are English.
std::vector<std::string> word_tokens(std::string_view text);

inline constexpr double kMtldTtrThreshold = 0.72;

// Bidirectional MTLD: the mean of the forward and backward factor-length
// scores. A factor closes when the running type-token ratio drops to the
// threshold or below; the trailing partial factor counts as
// (1 - ttr) / (1 - threshold). A direction with zero total factor count
// scores the token count. Throws std::invalid_argument on empty input.
double mtld(std::span<const std::string> tokens, double ttr_threshold = kMtldTtrThreshold);

enum class Grouping { All, Language, Script };

struct StatsRow {
  std::string subset;
  std::size_t contexts = 0;
  double response_avg_length = 0.0;
  double explanation_avg_length = 0.0;
  double response_mtld = 0.0;
  // "words" or "characters"
  std::string length_unit;

  friend bool operator==(const StatsRow&, const StatsRow&) = default;
};

struct StatsReport {
  std::vector<StatsRow> rows;
  std::vector<std::string> warnings;
};

using SubsetOf = std::function<std::string(const ResponsePair&)>;

// Rows are ordered by subset name. Names listed in `requested` that end up
// empty are reported in warnings instead of producing a row.
StatsReport dataset_stats(std::span<const ResponsePair> pairs, const SubsetOf& subset_of,
                          std::span<const std::string> requested = {});
StatsReport dataset_stats(std::span<const ResponsePair> pairs, Grouping grouping,
                          std::span<const std::string> requested = {});

std::string subset_name(const ResponsePair& p, Grouping grouping);

void to_json(nlohmann::json& j, const StatsRow& row);
void to_json(nlohmann::json& j, const StatsReport& report);
std::string render_table(const StatsReport& report);

}  // namespace coheval::stats
