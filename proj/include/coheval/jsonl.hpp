#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "coheval/errors.hpp"

namespace coheval {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written file. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

struct JsonlLine {
  std::size_t line_number = 0;  // 1-based
  nlohmann::json value;
};

// Blank lines are skipped. Throws DataError naming the line on bad JSON.
std::vector<JsonlLine> parse_jsonl(std::string_view content, std::string_view source_name);
std::vector<JsonlLine> read_jsonl(const std::filesystem::path& path);

template <typename T>
std::vector<T> read_records(const std::filesystem::path& path) {
  std::vector<T> out;
  for (auto& line : read_jsonl(path)) {
    try {
      out.push_back(line.value.get<T>());
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line.line_number) + ": " + e.what());
    }
  }
  return out;
}

template <typename T>
std::string to_jsonl(std::span<const T> records) {
  std::string out;
  for (const auto& r : records) {
    out += nlohmann::json(r).dump();
    out.push_back('\n');
  }
  return out;
}

template <typename T>
void write_records(const std::filesystem::path& path, std::span<const T> records) {
  write_file_atomic(path, to_jsonl(records));
}

}  // namespace coheval
