#include "coheval/generation.hpp"

#include "coheval/parallel.hpp"
#include "coheval/unicode.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <regex>

namespace coheval::gen {

using nlohmann::json;

const std::string_view kGenerationInstruction =
    "Given the dialog, generate a good and a bad response. In particular, the bad response should have issues "
    "that reduce its quality in terms of coherence, such as contradictions, logical inconsistencies, etc. "
    "Output the responses, together with a small explanation of the response using the following json format:";

const std::string_view kGenerationFormat =
    R"({"good_response": "..." , "good_explanation": "...", "bad_response": "...", "bad_explanation": "..."})";

const std::string_view kEnglishExampleBlock =
    R"(Dialogue: A: Have you figured out where you want to transfer to? B: I can't think of where to go. A: Where would you like to go to school?
Output: {"good_response": "B: Well, It is not yet decided, but maybe in the east coast." , "good_explanation": "The response acknowledges the question and provides a region.", "bad_response": "B: Do you think that I can get married after school?", "bad_explanation" : "The response does not acknowledge the prior question."}

Dialogue: A: You look so tan and healthy! B: Thanks. I just got back from summer camp A: How was it ? B: Great. I got to try so many things for the first time.
Output: {"good_response": "A: I wish I could go to summer camp too. I'm so bored at home.", "good_explanation": "The response acknowledges the positive emotions displayed and contrasts it with their own perspective of summer break.", "bad_response": "A: Did you eat while you where there? You look frail.", "bad_explanation": "The response contradicts the earlier statement indicating they were healthy."})";

namespace {

constexpr std::string_view kKeys[] = {"good_response", "good_explanation", "bad_response", "bad_explanation"};

// First balanced {...} region that parses as a JSON object. Braces inside
// JSON string literals do not count towards the balance.
std::optional<json> first_json_object(std::string_view raw) {
  for (std::size_t start = raw.find('{'); start != std::string_view::npos; start = raw.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < raw.size(); ++i) {
      const char c = raw[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        auto parsed = json::parse(raw.substr(start, i - start + 1), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) return parsed;
        break;
      }
    }
  }
  return std::nullopt;
}

std::string required_string(const json& object, std::string_view key) {
  const auto it = object.find(key);
  if (it == object.end()) {
    throw GenerationParseError(ParseFailureKind::MissingKey, std::string(key),
                               "generation output is missing key '" + std::string(key) + "'");
  }
  if (!it->is_string()) {
    throw GenerationParseError(ParseFailureKind::NotAString, std::string(key),
                               "generation output key '" + std::string(key) + "' is not a string");
  }
  auto value = text::trim(it->get<std::string>());
  if (value.empty()) {
    throw GenerationParseError(ParseFailureKind::EmptyValue, std::string(key),
                               "generation output key '" + std::string(key) + "' is empty");
  }
  return value;
}

std::pair<std::string, std::optional<Speaker>> strip_speaker_tag(const std::string& response) {
  static const std::regex kTag(R"(^\s*([AB])\s*:\s*)");
  std::smatch match;
  if (std::regex_search(response, match, kTag)) {
    auto rest = text::trim(response.substr(static_cast<std::size_t>(match.length(0))));
    if (!rest.empty()) return {rest, speaker_from_string(match.str(1))};
  }
  return {response, std::nullopt};
}

std::string escape_tsv(std::string_view cell) {
  std::string out;
  out.reserve(cell.size());
  for (char c : cell) {
    switch (c) {
      case '\\':
        out += "\\\\";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    auto tab = line.find('\t', pos);
    cells.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return cells;
}

}  // namespace

std::string_view to_string(ParseFailureKind k) {
  switch (k) {
    case ParseFailureKind::NoJsonObject:
      return "no_json_object";
    case ParseFailureKind::MissingKey:
      return "missing_key";
    case ParseFailureKind::NotAString:
      return "not_a_string";
    case ParseFailureKind::EmptyValue:
      return "empty_value";
    case ParseFailureKind::IdenticalResponses:
      return "identical_responses";
  }
  return "no_json_object";
}

std::string build_generation_prompt(const Context& ctx, const GenerationConfig& cfg) {
  std::string prompt;
  prompt += kGenerationInstruction;
  prompt += '\n';
  prompt += kGenerationFormat;
  prompt += "\n\nExamples:\n";
  prompt += cfg.example_block ? std::string_view(*cfg.example_block) : kEnglishExampleBlock;
  prompt += "\n\nDialogue:\n";
  prompt += render_turns(ctx.turns);
  return prompt;
}

llm::ChatRequest make_generation_request(const Context& ctx, const GenerationConfig& cfg,
                                         const std::string& model_name, int sample_index) {
  llm::ChatRequest request;
  request.model_name = model_name;
  request.messages = {{llm::Role::User, build_generation_prompt(ctx, cfg)}};
  request.temperature = cfg.temperature;
  request.top_p = cfg.top_p;
  request.max_tokens = cfg.max_tokens;
  request.sample_index = sample_index;
  return request;
}

ParsedGeneration parse_generation_output(std::string_view raw) {
  auto object = first_json_object(raw);
  if (!object) {
    throw GenerationParseError(ParseFailureKind::NoJsonObject, "", "generation output contains no JSON object");
  }
  std::string values[4];
  for (std::size_t i = 0; i < 4; ++i) values[i] = required_string(*object, kKeys[i]);

  ParsedGeneration parsed;
  std::tie(parsed.positive.response, parsed.positive_speaker) = strip_speaker_tag(values[0]);
  parsed.positive.explanation = values[1];
  std::tie(parsed.negative.response, parsed.negative_speaker) = strip_speaker_tag(values[2]);
  parsed.negative.explanation = values[3];
  if (parsed.positive.response == parsed.negative.response) {
    throw GenerationParseError(ParseFailureKind::IdenticalResponses, "",
                               "good_response and bad_response are identical");
  }
  return parsed;
}

GenerationRun generate_dataset(std::span<const Context> contexts, const GenerationConfig& cfg,
                               llm::ChatClient& client, const llm::ResponseCache* cache) {
  struct Outcome {
    std::optional<ResponsePair> pair;
    std::optional<GenerationFailure> failure;
    int attempts = 0;
  };

  const auto& model = client.config().model_name;
  const auto workers = cfg.parallelism != 0 ? cfg.parallelism
                                            : static_cast<std::size_t>(std::max(1, client.config().max_in_flight));
  auto outcomes = ordered_parallel_map(contexts.size(), workers, [&](std::size_t i) {
    const auto& ctx = contexts[i];
    Outcome outcome;
    std::string last_error = "no attempts made";
    for (int attempt = 0; attempt < std::max(1, cfg.max_parse_attempts); ++attempt) {
      outcome.attempts = attempt + 1;
      llm::ChatResult result;
      try {
        result = llm::cached_complete(client, make_generation_request(ctx, cfg, model, attempt), cache);
      } catch (const TransportError& e) {
        outcome.failure = GenerationFailure{ctx.id, outcome.attempts, e.what(), true};
        return outcome;
      }
      try {
        auto parsed = parse_generation_output(result.text);
        outcome.pair = ResponsePair{ctx.id,          ctx.dialogue_id, ctx.language, ctx.turns,
                                    parsed.positive, parsed.negative, model};
        return outcome;
      } catch (const GenerationParseError& e) {
        last_error = std::string(to_string(e.kind())) + ": " + e.what();
        spdlog::debug("context {} sample {} unusable: {}", ctx.id, attempt, last_error);
      }
    }
    outcome.failure = GenerationFailure{ctx.id, outcome.attempts, last_error, false};
    return outcome;
  });

  GenerationRun run;
  run.attempts.reserve(outcomes.size());
  for (auto& outcome : outcomes) {
    run.attempts.push_back(outcome.attempts);
    if (outcome.pair) run.pairs.push_back(std::move(*outcome.pair));
    if (outcome.failure) run.failures.push_back(std::move(*outcome.failure));
  }
  return run;
}

std::vector<ValidationRow> sample_for_validation(std::span<const ResponsePair> pairs, std::size_t n,
                                                 std::uint64_t seed) {
  if (n > pairs.size()) {
    throw DataError("cannot sample " + std::to_string(n) + " validation rows from " +
                    std::to_string(pairs.size()) + " pairs");
  }
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<ValidationRow> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pair = pairs[order[i]];
    const bool positive = (rng() & 1U) == 0;
    const auto& side = positive ? pair.positive : pair.negative;
    rows.push_back({pair.context_id + (positive ? "/pos" : "/neg"), render_turns(pair.context),
                    std::string(to_string(next_speaker(pair.context))) + ": " + side.response, side.explanation});
  }
  return rows;
}

std::string render_validation_sheet(std::span<const ValidationRow> rows) {
  std::string out = "sample_id\tcontext\tresponse\texplanation\trating\n";
  for (const auto& row : rows) {
    out += escape_tsv(row.sample_id) + '\t' + escape_tsv(row.context) + '\t' + escape_tsv(row.response) + '\t' +
           escape_tsv(row.explanation) + "\t\n";
  }
  return out;
}

std::vector<int> read_validation_ratings(std::string_view tsv) {
  std::vector<int> ratings;
  std::size_t pos = 0;
  std::size_t line_number = 0;
  std::optional<std::size_t> rating_column;
  while (pos < tsv.size()) {
    auto end = tsv.find('\n', pos);
    if (end == std::string_view::npos) end = tsv.size();
    auto line = tsv.substr(pos, end - pos);
    pos = end + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto cells = split_tabs(line);
    if (!rating_column) {
      const auto it = std::find(cells.begin(), cells.end(), "rating");
      if (it == cells.end()) throw DataError("validation sheet header has no 'rating' column");
      rating_column = static_cast<std::size_t>(it - cells.begin());
      continue;
    }
    if (*rating_column >= cells.size()) continue;
    const auto cell = text::trim(cells[*rating_column]);
    if (cell.empty()) continue;
    try {
      std::size_t used = 0;
      const int value = std::stoi(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
      ratings.push_back(value);
    } catch (const std::exception&) {
      throw DataError("validation sheet line " + std::to_string(line_number) + ": rating '" + cell +
                      "' is not an integer");
    }
  }
  return ratings;
}

double compute_appropriateness_rate(std::span<const int> ratings, int threshold) {
  if (ratings.empty()) throw DataError("no annotations to compute an appropriateness rate from");
  const auto appropriate = std::count_if(ratings.begin(), ratings.end(), [&](int r) { return r >= threshold; });
  return static_cast<double>(appropriate) / static_cast<double>(ratings.size());
}

}  // namespace coheval::gen
