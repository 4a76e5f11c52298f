#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "coheval/llm_client.hpp"
#include "coheval/records.hpp"
#include "coheval/types.hpp"

namespace coheval::eval {

inline constexpr std::string_view kCoherenceQuestion = "Given the context, is the response Coherent?";

// Bump whenever the wording below changes: fine-tuned evaluators only work
// with the exact template they were trained on.
inline constexpr std::string_view kPromptVersion = "coherence-qa/v1";
extern const std::string_view kSystemPrompt;

enum class ShotMode { ZeroShot, OneShot };
enum class AnswerOrder { ExplanationFirst, AnswerFirst };

struct ShotExample {
  std::vector<Turn> context;
  std::string response;
  std::string explanation;
  Label verdict = Label::Yes;
};

struct ShotConfig {
  ShotMode mode = ShotMode::ZeroShot;
  Language example_language;
  std::optional<ShotExample> example;
  AnswerOrder order = AnswerOrder::ExplanationFirst;

  // Throws UsageError when one_shot has no example.
  void validate() const;
};

ShotExample default_english_example();

// "The answer is Yes." / "The answer is No."
std::string verdict_sentence(Label label);

// Assistant text in the configured order, e.g. "<explanation> The answer is Yes."
std::string target_text(std::string_view explanation, Label label, AnswerOrder order = AnswerOrder::ExplanationFirst);

// Context, candidate response, question and answer-format instruction.
std::string render_eval_body(std::span<const Turn> context, std::string_view response,
                             AnswerOrder order = AnswerOrder::ExplanationFirst);

// [system, user]; one-shot prepends the worked example to the user message.
std::vector<llm::Message> build_eval_prompt(const EvalSample& sample, const ShotConfig& shots);

struct VerdictParse {
  Verdict verdict = Verdict::Unparseable;
  std::string explanation;
};

// Total: every input maps to Yes, No or Unparseable.
VerdictParse parse_verdict(std::string_view raw);

struct DecodeParams {
  double temperature = 1.0;
  double top_p = 0.8;
  double repetition_penalty = 1.1;
  int max_tokens = 256;
};

struct EvaluationRun {
  std::vector<Prediction> predictions;
  double unparseable_rate = 0.0;
  std::size_t transport_failures = 0;
};

// One prediction per sample, in input order. Endpoint failures become
// Unparseable predictions carrying transport_error.
EvaluationRun run_evaluation(std::span<const EvalSample> samples, const ShotConfig& shots,
                             llm::ChatClient& client, const llm::ResponseCache* cache,
                             const DecodeParams& decode = {}, std::size_t parallelism = 0);

// Each pair becomes "<context_id>/pos" (Yes) and "<context_id>/neg" (No).
std::vector<EvalSample> samples_from_pairs(std::span<const ResponsePair> pairs);

struct SftRecord {
  std::vector<llm::Message> messages;
  Label label = Label::Yes;
};

// Serializes as {"messages": [...]}; the label is not written.
void to_json(nlohmann::json& j, const SftRecord& r);

// Two records per pair, shuffled with `seed`.
std::vector<SftRecord> export_sft_records(std::span<const ResponsePair> pairs, const ShotConfig& shots,
                                          std::uint64_t seed);

}  // namespace coheval::eval
