#include "coheval/judge.hpp"

#include "coheval/errors.hpp"
#include "coheval/parallel.hpp"
#include "coheval/unicode.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <regex>
#include <unordered_map>

namespace coheval::judge {
namespace {

constexpr std::string_view kJudgeSystemPrompt =
    "You grade explanations written by an automatic evaluator of dialogue coherence.";

constexpr std::string_view kJudgeInstruction =
    "Rate the explanation under evaluation on a scale from 1 (wrong or unhelpful) to 5 (accurate, specific and "
    "well justified). Give a brief justification, then finish with a final line of the form \"Score: N\" where N "
    "is an integer from 1 to 5.";

}  // namespace

void to_json(nlohmann::json& j, const JudgeVerdict& v) {
  j = nlohmann::json{{"sample_id", v.sample_id}, {"score", v.score}, {"judge_model", v.judge_model}};
  j["rationale"] = v.rationale ? nlohmann::json(*v.rationale) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, JudgeVerdict& v) {
  v.sample_id = j.at("sample_id").get<std::string>();
  v.score = j.at("score").get<int>();
  if (v.score < 1 || v.score > 5) throw DataError("judge score outside [1, 5]");
  v.judge_model = j.value("judge_model", std::string{});
  v.rationale.reset();
  if (auto it = j.find("rationale"); it != j.end() && !it->is_null()) v.rationale = it->get<std::string>();
}

std::vector<llm::Message> build_judge_prompt(std::span<const Turn> context, std::string_view response,
                                             std::string_view explanation,
                                             std::optional<std::string_view> reference_explanation) {
  std::string user = "Dialogue:\n";
  user += render_turns(context);
  user += "\n\nCandidate response:\n";
  user += to_string(next_speaker(context));
  user += ": ";
  user += response;
  user += "\n\nExplanation under evaluation:\n";
  user += explanation;
  if (reference_explanation) {
    user += "\n\nReference explanation:\n";
    user += *reference_explanation;
  }
  user += "\n\n";
  user += kJudgeInstruction;
  return {{llm::Role::System, std::string(kJudgeSystemPrompt)}, {llm::Role::User, std::move(user)}};
}

std::optional<int> parse_judge_score(std::string_view raw) {
  static const std::regex kScore(R"(^\s*\**\s*score\s*\**\s*:\s*\**\s*(-?\d+)\s*\**\s*\.?\s*$)", std::regex::icase);
  const auto trimmed = text::trim(raw);
  const auto start = trimmed.rfind('\n');
  const auto last_line = start == std::string::npos ? trimmed : trimmed.substr(start + 1);
  std::smatch match;
  if (!std::regex_match(last_line, match, kScore)) return std::nullopt;
  try {
    const int score = std::stoi(match.str(1));
    if (score < 1 || score > 5) return std::nullopt;
    return score;
  } catch (const std::out_of_range&) {
    return std::nullopt;
  }
}

std::vector<std::size_t> select_sample(std::size_t population, std::optional<std::size_t> n, std::uint64_t seed) {
  std::vector<std::size_t> indices(population);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  if (!n) return indices;
  if (*n > population) {
    throw DataError("cannot sample " + std::to_string(*n) + " items from " + std::to_string(population));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(indices.begin(), indices.end(), rng);
  indices.resize(*n);
  std::sort(indices.begin(), indices.end());
  return indices;
}

JudgeRun judge_explanations(std::span<const Prediction> predictions, std::span<const EvalSample> samples,
                            const JudgeOptions& options, llm::ChatClient& client, const llm::ResponseCache* cache) {
  std::unordered_map<std::string_view, const EvalSample*> sample_by_id;
  for (const auto& s : samples) sample_by_id.emplace(s.sample_id, &s);

  std::vector<const Prediction*> eligible;
  for (const auto& p : predictions) {
    if (p.transport_error || text::trim(p.explanation).empty()) continue;
    if (!sample_by_id.contains(p.sample_id)) throw DataError("no sample for prediction '" + p.sample_id + "'");
    eligible.push_back(&p);
  }
  const auto& judge_model = client.config().model_name;
  if (!eligible.empty() && eligible.front()->model_name == judge_model) {
    spdlog::warn("judge model '{}' is also the evaluated model; its scores may be biased", judge_model);
  }

  const auto chosen = select_sample(eligible.size(), options.n, options.seed);
  const auto workers = options.parallelism != 0 ? options.parallelism
                                                : static_cast<std::size_t>(std::max(1, client.config().max_in_flight));

  struct Outcome {
    std::optional<JudgeVerdict> verdict;
  };
  auto outcomes = ordered_parallel_map(chosen.size(), workers, [&](std::size_t k) {
    const auto& p = *eligible[chosen[k]];
    const auto& sample = *sample_by_id.at(p.sample_id);
    std::optional<std::string_view> reference;
    if (options.with_reference && sample.reference_explanation) reference = *sample.reference_explanation;

    llm::ChatRequest request;
    request.model_name = judge_model;
    request.messages = build_judge_prompt(sample.context, sample.response, p.explanation, reference);
    request.temperature = options.temperature;
    request.max_tokens = options.max_tokens;

    Outcome outcome;
    for (int attempt = 0; attempt < 2; ++attempt) {
      request.sample_index = attempt;
      std::string text;
      try {
        text = llm::cached_complete(client, request, cache).text;
      } catch (const TransportError& e) {
        spdlog::warn("judge call for {} failed: {}", p.sample_id, e.what());
        break;
      }
      if (auto score = parse_judge_score(text)) {
        const auto trimmed = text::trim(text);
        const auto cut = trimmed.rfind('\n');
        std::optional<std::string> rationale;
        if (cut != std::string::npos) rationale = text::trim(trimmed.substr(0, cut));
        outcome.verdict = JudgeVerdict{p.sample_id, *score, judge_model, rationale};
        break;
      }
    }
    return outcome;
  });

  JudgeRun run;
  run.summary.judge_model = judge_model;
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    const auto& id = eligible[chosen[k]]->sample_id;
    run.sampled_ids.push_back(id);
    if (outcomes[k].verdict) {
      run.verdicts.push_back(std::move(*outcomes[k].verdict));
    } else {
      run.invalid_ids.push_back(id);
    }
  }
  run.summary.judged = run.verdicts.size();
  run.summary.invalid = run.invalid_ids.size();
  if (run.verdicts.empty()) throw DataError("judge produced no valid verdicts");

  double sum = 0.0;
  for (const auto& v : run.verdicts) sum += v.score;
  run.summary.mean = sum / static_cast<double>(run.verdicts.size());
  double squares = 0.0;
  for (const auto& v : run.verdicts) squares += (v.score - run.summary.mean) * (v.score - run.summary.mean);
  run.summary.std_dev = std::sqrt(squares / static_cast<double>(run.verdicts.size()));
  return run;
}

}  // namespace coheval::judge
