#include "coheval/types.hpp"

#include "coheval/errors.hpp"

#include <regex>

namespace coheval {

std::string_view to_string(Speaker s) { return s == Speaker::A ? "A" : "B"; }

Speaker speaker_from_string(std::string_view s) {
  if (s == "A") return Speaker::A;
  if (s == "B") return Speaker::B;
  throw DataError("invalid speaker tag '" + std::string(s) + "' (expected A or B)");
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::Validation:
      return "validation";
    case Split::Test:
      return "test";
  }
  return "train";
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "validation" || s == "valid" || s == "dev") return Split::Validation;
  if (s == "test") return Split::Test;
  throw DataError("invalid split '" + std::string(s) + "'");
}

Language::Language(std::string code) : code_(std::move(code)) {
  static const std::regex kPattern("[a-z]{2,3}(-[a-z0-9]{2,8})?");
  if (!std::regex_match(code_, kPattern)) {
    throw DataError("invalid language code '" + code_ + "'");
  }
}

bool Language::uses_character_tokens() const {
  return code_ == "zh" || code_.rfind("zh-", 0) == 0;
}

std::string render_turns(std::span<const Turn> turns) {
  std::string out;
  for (const auto& turn : turns) {
    if (!out.empty()) out.push_back('\n');
    out.append(to_string(turn.speaker));
    out.append(": ");
    out.append(turn.text);
  }
  return out;
}

Speaker next_speaker(std::span<const Turn> turns) {
  return turns.empty() ? Speaker::A : other(turns.back().speaker);
}

void to_json(nlohmann::json& j, const Turn& t) {
  j = nlohmann::json{{"speaker", to_string(t.speaker)}, {"text", t.text}};
}

void from_json(const nlohmann::json& j, Turn& t) {
  t.speaker = speaker_from_string(j.at("speaker").get<std::string>());
  t.text = j.at("text").get<std::string>();
}

void to_json(nlohmann::json& j, const Language& l) { j = l.code(); }

void from_json(const nlohmann::json& j, Language& l) { l = Language(j.get<std::string>()); }

void to_json(nlohmann::json& j, const Dialogue& d) {
  j = nlohmann::json{{"dialogue_id", d.id},
                     {"language", d.language},
                     {"split", to_string(d.split)},
                     {"turns", d.turns}};
}

void from_json(const nlohmann::json& j, Dialogue& d) {
  d.id = j.at("dialogue_id").get<std::string>();
  d.language = j.at("language").get<Language>();
  d.split = split_from_string(j.at("split").get<std::string>());
  d.turns = j.at("turns").get<std::vector<Turn>>();
}

}  // namespace coheval
