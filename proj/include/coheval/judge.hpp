#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "coheval/llm_client.hpp"
#include "coheval/metrics.hpp"
#include "coheval/records.hpp"

namespace coheval::judge {

inline constexpr std::string_view kJudgePromptVersion = "explanation-judge/v1";

struct JudgeVerdict {
  std::string sample_id;
  int score = 0;  // in [1, 5]
  std::string judge_model;
  std::optional<std::string> rationale;
};

void to_json(nlohmann::json& j, const JudgeVerdict& v);
void from_json(const nlohmann::json& j, JudgeVerdict& v);

// The reference block is the only difference between the two modes.
std::vector<llm::Message> build_judge_prompt(std::span<const Turn> context, std::string_view response,
                                             std::string_view explanation,
                                             std::optional<std::string_view> reference_explanation);

// Integer from a final "Score: N" line; nullopt when missing or outside [1, 5].
std::optional<int> parse_judge_score(std::string_view raw);

// Seeded choice of n distinct indices out of [0, population), returned in
// ascending order. n = nullopt takes everything.
std::vector<std::size_t> select_sample(std::size_t population, std::optional<std::size_t> n, std::uint64_t seed);

struct JudgeOptions {
  std::optional<std::size_t> n;  // nullopt = judge all eligible predictions
  std::uint64_t seed = 0;
  bool with_reference = true;
  double temperature = 0.0;
  int max_tokens = 256;
  std::size_t parallelism = 0;
};

struct JudgeRun {
  metrics::JudgeSummary summary;
  std::vector<JudgeVerdict> verdicts;
  std::vector<std::string> sampled_ids;
  std::vector<std::string> invalid_ids;
};

// Eligible predictions have a non-empty explanation and no transport error.
// A reply without a valid score is re-asked once, then counted invalid.
// Throws DataError if n exceeds the eligible count or no verdict is valid.
JudgeRun judge_explanations(std::span<const Prediction> predictions, std::span<const EvalSample> samples,
                            const JudgeOptions& options, llm::ChatClient& client, const llm::ResponseCache* cache);

}  // namespace coheval::judge
