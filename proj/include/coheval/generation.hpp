#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coheval/errors.hpp"
#include "coheval/llm_client.hpp"
#include "coheval/records.hpp"
#include "coheval/types.hpp"

namespace coheval::gen {

// Fixed instruction and JSON-format lines of the generation prompt.
extern const std::string_view kGenerationInstruction;
extern const std::string_view kGenerationFormat;
// English few-shot block, used when no localized block is supplied.
extern const std::string_view kEnglishExampleBlock;

struct GenerationConfig {
  double temperature = 0.7;
  double top_p = 1.0;
  int max_tokens = 300;
  Language prompt_language;
  // Localized few-shot block for prompt_language; English when unset.
  std::optional<std::string> example_block;
  // Samples drawn per context before the context is reported as failed.
  int max_parse_attempts = 3;
  // Worker threads; 0 means the endpoint's max_in_flight.
  std::size_t parallelism = 0;
};

std::string build_generation_prompt(const Context& ctx, const GenerationConfig& cfg);

llm::ChatRequest make_generation_request(const Context& ctx, const GenerationConfig& cfg,
                                         const std::string& model_name, int sample_index = 0);

enum class ParseFailureKind { NoJsonObject, MissingKey, NotAString, EmptyValue, IdenticalResponses };

std::string_view to_string(ParseFailureKind k);

class GenerationParseError : public DataError {
 public:
  GenerationParseError(ParseFailureKind kind, std::string key, const std::string& message)
      : DataError(message), kind_(kind), key_(std::move(key)) {}

  ParseFailureKind kind() const { return kind_; }
  // Offending key for MissingKey / NotAString / EmptyValue; empty otherwise.
  const std::string& key() const { return key_; }

 private:
  ParseFailureKind kind_;
  std::string key_;
};

struct ParsedGeneration {
  ResponseText positive;
  ResponseText negative;
  // Speaker tags stripped from the front of each response, if any.
  std::optional<Speaker> positive_speaker;
  std::optional<Speaker> negative_speaker;
};

// Uses the first balanced {...} region of `raw` that parses as a JSON object.
// Throws GenerationParseError.
ParsedGeneration parse_generation_output(std::string_view raw);

struct GenerationFailure {
  std::string context_id;
  int attempts = 0;
  std::string reason;
  bool transport = false;
};

struct GenerationRun {
  // Successful pairs in input order.
  std::vector<ResponsePair> pairs;
  std::vector<GenerationFailure> failures;
  // Samples drawn per input context, aligned with the input.
  std::vector<int> attempts;
};

// Never throws for per-context failures; they land in `failures`.
GenerationRun generate_dataset(std::span<const Context> contexts, const GenerationConfig& cfg,
                               llm::ChatClient& client, const llm::ResponseCache* cache);

struct ValidationRow {
  std::string sample_id;
  std::string context;
  std::string response;
  std::string explanation;
};

// Seeded sample of n pairs without replacement; each contributes one row
// whose polarity is picked by the same generator. Throws DataError if
// n > |pairs|.
std::vector<ValidationRow> sample_for_validation(std::span<const ResponsePair> pairs, std::size_t n,
                                                 std::uint64_t seed);

// TSV with a header and an empty rating column. Tabs, newlines and
// backslashes inside cells are written as \t, \n and \\.
std::string render_validation_sheet(std::span<const ValidationRow> rows);

// Reads the rating column of an annotated sheet. Rows with an empty rating
// are skipped; non-integer ratings throw DataError.
std::vector<int> read_validation_ratings(std::string_view tsv);

// |{r >= threshold}| / |ratings|. Throws DataError on an empty list.
double compute_appropriateness_rate(std::span<const int> ratings, int threshold = 1);

}  // namespace coheval::gen
