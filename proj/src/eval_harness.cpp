#include "coheval/eval_harness.hpp"

#include "coheval/errors.hpp"
#include "coheval/parallel.hpp"
#include "coheval/unicode.hpp"

#include <algorithm>
#include <random>
#include <regex>

namespace coheval::eval {

const std::string_view kSystemPrompt =
    "You are an expert judge of dialogue quality. You decide whether a candidate response is coherent with "
    "the conversation that precedes it.";

namespace {

constexpr std::string_view kExplanationFirstInstruction =
    "First explain your judgement in one or two sentences, then end with exactly \"The answer is Yes.\" or "
    "\"The answer is No.\"";
constexpr std::string_view kAnswerFirstInstruction =
    "Start with exactly \"The answer is Yes.\" or \"The answer is No.\", then explain your judgement in one or "
    "two sentences.";

std::string render_response(std::span<const Turn> context, std::string_view response) {
  return std::string(to_string(next_speaker(context))) + ": " + std::string(response);
}

std::string strip_leading_marks(std::string s) {
  const auto first = s.find_first_not_of(" .:*\t\r\n");
  return first == std::string::npos ? std::string{} : s.substr(first);
}

}  // namespace

void ShotConfig::validate() const {
  if (mode == ShotMode::OneShot && !example) throw UsageError("one-shot evaluation requires an example");
}

ShotExample default_english_example() {
  ShotExample ex;
  ex.context = {{Speaker::A, "I'm thinking about adopting a dog, but my apartment is pretty small."},
                {Speaker::B, "A smaller breed might be a good fit. Have you looked at any shelters?"},
                {Speaker::A, "Not yet. I was planning to visit one this weekend."}};
  ex.response = "That sounds great! Ask the staff which dogs are calm indoors, they usually know.";
  ex.explanation =
      "The response supports A's plan to visit a shelter and gives advice that fits the small apartment.";
  ex.verdict = Label::Yes;
  return ex;
}

std::string verdict_sentence(Label label) {
  return label == Label::Yes ? "The answer is Yes." : "The answer is No.";
}

std::string target_text(std::string_view explanation, Label label, AnswerOrder order) {
  const auto trimmed = text::trim(explanation);
  if (order == AnswerOrder::AnswerFirst) {
    return trimmed.empty() ? verdict_sentence(label) : verdict_sentence(label) + " " + trimmed;
  }
  return trimmed.empty() ? verdict_sentence(label) : trimmed + " " + verdict_sentence(label);
}

std::string render_eval_body(std::span<const Turn> context, std::string_view response, AnswerOrder order) {
  std::string body = "Context:\n";
  body += render_turns(context);
  body += "\n\nResponse:\n";
  body += render_response(context, response);
  body += "\n\n";
  body += kCoherenceQuestion;
  body += '\n';
  body += order == AnswerOrder::ExplanationFirst ? kExplanationFirstInstruction : kAnswerFirstInstruction;
  return body;
}

std::vector<llm::Message> build_eval_prompt(const EvalSample& sample, const ShotConfig& shots) {
  shots.validate();
  std::string user;
  if (shots.mode == ShotMode::OneShot) {
    const auto& ex = *shots.example;
    user += "Here is an example.\n\n";
    user += render_eval_body(ex.context, ex.response, shots.order);
    user += "\nAnswer: ";
    user += target_text(ex.explanation, ex.verdict, shots.order);
    user += "\n\nNow evaluate the following.\n\n";
  }
  user += render_eval_body(sample.context, sample.response, shots.order);
  return {{llm::Role::System, std::string(kSystemPrompt)}, {llm::Role::User, std::move(user)}};
}

VerdictParse parse_verdict(std::string_view raw_view) {
  static const std::regex kVerdict(R"(the answer is\s*:?\s*\**\s*(yes|no)\b)", std::regex::icase);
  static const std::regex kToken(R"(\b(yes|no)\b)", std::regex::icase);
  const std::string raw(raw_view);

  std::smatch last;
  bool found = false;
  for (auto it = std::sregex_iterator(raw.begin(), raw.end(), kVerdict); it != std::sregex_iterator(); ++it) {
    last = *it;
    found = true;
  }
  if (found) {
    VerdictParse out;
    out.verdict = text::to_lower(last.str(1)) == "yes" ? Verdict::Yes : Verdict::No;
    out.explanation = text::trim(raw.substr(0, static_cast<std::size_t>(last.position(0))));
    if (out.explanation.empty()) {
      out.explanation = text::trim(strip_leading_marks(raw.substr(static_cast<std::size_t>(last.position(0) + last.length(0)))));
    }
    return out;
  }

  const auto trimmed = text::trim(raw);
  const auto line_start = trimmed.rfind('\n');
  const auto final_line = line_start == std::string::npos ? trimmed : trimmed.substr(line_start + 1);
  bool saw_yes = false;
  bool saw_no = false;
  for (auto it = std::sregex_iterator(final_line.begin(), final_line.end(), kToken); it != std::sregex_iterator();
       ++it) {
    (text::to_lower(it->str(1)) == "yes" ? saw_yes : saw_no) = true;
  }
  if (saw_yes != saw_no) {
    VerdictParse out;
    out.verdict = saw_yes ? Verdict::Yes : Verdict::No;
    out.explanation = line_start == std::string::npos ? std::string{} : text::trim(trimmed.substr(0, line_start));
    return out;
  }
  return {Verdict::Unparseable, raw};
}

EvaluationRun run_evaluation(std::span<const EvalSample> samples, const ShotConfig& shots,
                             llm::ChatClient& client, const llm::ResponseCache* cache, const DecodeParams& decode,
                             std::size_t parallelism) {
  shots.validate();
  const auto& model = client.config().model_name;
  const auto workers =
      parallelism != 0 ? parallelism : static_cast<std::size_t>(std::max(1, client.config().max_in_flight));

  auto predictions = ordered_parallel_map(samples.size(), workers, [&](std::size_t i) {
    const auto& sample = samples[i];
    llm::ChatRequest request;
    request.model_name = model;
    request.messages = build_eval_prompt(sample, shots);
    request.temperature = decode.temperature;
    request.top_p = decode.top_p;
    request.max_tokens = decode.max_tokens;
    request.extra_params["repetition_penalty"] = decode.repetition_penalty;

    Prediction p;
    p.sample_id = sample.sample_id;
    p.model_name = model;
    try {
      const auto result = llm::cached_complete(client, request, cache);
      const auto parsed = parse_verdict(result.text);
      p.verdict = parsed.verdict;
      p.explanation = parsed.explanation;
      p.raw_output = result.text;
    } catch (const TransportError& e) {
      p.verdict = Verdict::Unparseable;
      p.transport_error = e.what();
    }
    return p;
  });

  EvaluationRun run;
  std::size_t unparseable = 0;
  for (const auto& p : predictions) {
    unparseable += p.verdict == Verdict::Unparseable ? 1 : 0;
    run.transport_failures += p.transport_error ? 1 : 0;
  }
  run.unparseable_rate =
      predictions.empty() ? 0.0 : static_cast<double>(unparseable) / static_cast<double>(predictions.size());
  run.predictions = std::move(predictions);
  return run;
}

std::vector<EvalSample> samples_from_pairs(std::span<const ResponsePair> pairs) {
  std::vector<EvalSample> out;
  out.reserve(pairs.size() * 2);
  for (const auto& pair : pairs) {
    out.push_back({pair.context_id + "/pos", pair.language, pair.context, pair.positive.response, Label::Yes,
                   pair.positive.explanation});
    out.push_back({pair.context_id + "/neg", pair.language, pair.context, pair.negative.response, Label::No,
                   pair.negative.explanation});
  }
  return out;
}

void to_json(nlohmann::json& j, const SftRecord& r) { j = nlohmann::json{{"messages", r.messages}}; }

std::vector<SftRecord> export_sft_records(std::span<const ResponsePair> pairs, const ShotConfig& shots,
                                          std::uint64_t seed) {
  std::vector<SftRecord> records;
  records.reserve(pairs.size() * 2);
  for (const auto& sample : samples_from_pairs(pairs)) {
    SftRecord record;
    record.label = sample.label;
    record.messages = build_eval_prompt(sample, shots);
    record.messages.push_back({llm::Role::Assistant,
                               target_text(sample.reference_explanation.value_or(""), sample.label, shots.order)});
    records.push_back(std::move(record));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(records.begin(), records.end(), rng);
  return records;
}

}  // namespace coheval::eval
