#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "coheval/eval_harness.hpp"
#include "coheval/generation.hpp"
#include "coheval/llm_client.hpp"

namespace coheval::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitTransport = 3,
  kExitInternal = 4,
};

struct PipelineConfig {
  std::optional<llm::EndpointConfig> generator;
  std::optional<llm::EndpointConfig> evaluator;
  std::optional<llm::EndpointConfig> judge;
  std::filesystem::path cache_root;  // empty = caching disabled
  std::optional<std::uint64_t> seed;
  std::vector<std::string> languages;  // empty = all

  std::filesystem::path corpus_in;
  std::filesystem::path dataset_out;
  std::filesystem::path predictions_out;
  std::filesystem::path report_out;

  gen::GenerationConfig generation;
  std::optional<std::filesystem::path> example_block_file;
  eval::DecodeParams decode;
};

// Reads a TOML-style document:
//
//   seed = 13
//   cache_root = "cache"
//   languages = ["en", "de"]
//   [generator]            # also [evaluator], [judge]
//   base_url = "http://localhost:8000/v1"
//   api_key_env = "OPENAI_API_KEY"
//   model_name = "gpt-4"
//   timeout_s = 60
//   max_attempts = 5
//   max_in_flight = 4
//   retry_base_delay_ms = 1000
//   [generation]  temperature, top_p, max_tokens, max_parse_attempts, example_block_file
//   [decode]      temperature, top_p, repetition_penalty, max_tokens
//   [paths]       corpus_in, dataset_out, predictions_out, report_out
//
// Unknown keys are a UsageError. Secrets are never read from the file, only
// the name of the variable that holds them.
PipelineConfig load_config(const std::filesystem::path& path);

// Entry point shared by the executable and the tests. args[0] is the program
// name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coheval::cli
