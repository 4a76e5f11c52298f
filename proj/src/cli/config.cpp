#include "coheval/cli.hpp"

#include "coheval/errors.hpp"

#include <CLI11.hpp>

#include <charconv>

namespace coheval::cli {
namespace {

std::string single(const CLI::ConfigItem& item) {
  if (item.inputs.size() != 1) throw UsageError("config key '" + item.fullname() + "' expects a single value");
  return item.inputs.front();
}

double as_double(const CLI::ConfigItem& item) {
  const auto value = single(item);
  try {
    std::size_t used = 0;
    const double d = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return d;
  } catch (const std::exception&) {
    throw UsageError("config key '" + item.fullname() + "' expects a number, got '" + value + "'");
  }
}

long long as_integer(const CLI::ConfigItem& item) {
  const auto value = single(item);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw UsageError("config key '" + item.fullname() + "' expects an integer, got '" + value + "'");
  }
  return out;
}

void apply_endpoint(llm::EndpointConfig& endpoint, const CLI::ConfigItem& item) {
  const auto& key = item.name;
  if (key == "base_url") {
    endpoint.base_url = single(item);
  } else if (key == "api_key_env") {
    endpoint.api_key_env = single(item);
  } else if (key == "model_name") {
    endpoint.model_name = single(item);
  } else if (key == "timeout_s") {
    endpoint.timeout_s = as_double(item);
  } else if (key == "max_attempts") {
    endpoint.max_attempts = static_cast<int>(as_integer(item));
  } else if (key == "max_in_flight") {
    endpoint.max_in_flight = static_cast<int>(as_integer(item));
  } else if (key == "retry_base_delay_ms") {
    endpoint.retry_base_delay = std::chrono::milliseconds(as_integer(item));
  } else if (key == "api_key") {
    throw UsageError("config must not contain secrets; name the variable with api_key_env instead");
  } else {
    throw UsageError("unknown config key '" + item.fullname() + "'");
  }
}

}  // namespace

PipelineConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw UsageError("config file not found: " + path.string());
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(path.string());
  } catch (const CLI::Error& e) {
    throw UsageError("cannot parse config " + path.string() + ": " + e.what());
  }

  PipelineConfig cfg;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    const auto section = item.parents.empty() ? std::string{} : item.parents.front();
    if (item.parents.size() > 1) throw UsageError("nested config section in '" + item.fullname() + "'");

    if (section.empty()) {
      if (item.name == "seed") {
        cfg.seed = static_cast<std::uint64_t>(as_integer(item));
      } else if (item.name == "cache_root") {
        cfg.cache_root = single(item);
      } else if (item.name == "languages") {
        cfg.languages = item.inputs;
      } else {
        throw UsageError("unknown config key '" + item.fullname() + "'");
      }
    } else if (section == "generator" || section == "evaluator" || section == "judge") {
      auto& slot = section == "generator" ? cfg.generator : section == "evaluator" ? cfg.evaluator : cfg.judge;
      if (!slot) slot.emplace();
      apply_endpoint(*slot, item);
    } else if (section == "generation") {
      if (item.name == "temperature") {
        cfg.generation.temperature = as_double(item);
      } else if (item.name == "top_p") {
        cfg.generation.top_p = as_double(item);
      } else if (item.name == "max_tokens") {
        cfg.generation.max_tokens = static_cast<int>(as_integer(item));
      } else if (item.name == "max_parse_attempts") {
        cfg.generation.max_parse_attempts = static_cast<int>(as_integer(item));
      } else if (item.name == "example_block_file") {
        cfg.example_block_file = single(item);
      } else {
        throw UsageError("unknown config key '" + item.fullname() + "'");
      }
    } else if (section == "decode") {
      if (item.name == "temperature") {
        cfg.decode.temperature = as_double(item);
      } else if (item.name == "top_p") {
        cfg.decode.top_p = as_double(item);
      } else if (item.name == "repetition_penalty") {
        cfg.decode.repetition_penalty = as_double(item);
      } else if (item.name == "max_tokens") {
        cfg.decode.max_tokens = static_cast<int>(as_integer(item));
      } else {
        throw UsageError("unknown config key '" + item.fullname() + "'");
      }
    } else if (section == "paths") {
      if (item.name == "corpus_in") {
        cfg.corpus_in = single(item);
      } else if (item.name == "dataset_out") {
        cfg.dataset_out = single(item);
      } else if (item.name == "predictions_out") {
        cfg.predictions_out = single(item);
      } else if (item.name == "report_out") {
        cfg.report_out = single(item);
      } else {
        throw UsageError("unknown config key '" + item.fullname() + "'");
      }
    } else {
      throw UsageError("unknown config section '" + section + "'");
    }
  }
  return cfg;
}

}  // namespace coheval::cli
