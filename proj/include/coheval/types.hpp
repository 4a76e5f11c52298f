#pragma once

#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace coheval {

enum class Speaker { A, B };

std::string_view to_string(Speaker s);
Speaker speaker_from_string(std::string_view s);
constexpr Speaker other(Speaker s) { return s == Speaker::A ? Speaker::B : Speaker::A; }

enum class Split { Train, Validation, Test };

std::string_view to_string(Split s);
Split split_from_string(std::string_view s);

// ISO-639-style language code ("en", "zh", "pt-br"). Any well-formed code is
// accepted; en, de, it, fr and zh are the ones the tooling was built around.
class Language {
 public:
  Language() : code_("en") {}
  explicit Language(std::string code);

  const std::string& code() const { return code_; }

  // Scripts without word delimiters are measured per character.
  bool uses_character_tokens() const;

  friend auto operator<=>(const Language&, const Language&) = default;

 private:
  std::string code_;
};

struct Turn {
  Speaker speaker = Speaker::A;
  std::string text;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Dialogue {
  std::string id;
  Language language;
  Split split = Split::Train;
  std::vector<Turn> turns;

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

// A strict prefix of a dialogue, used as generation/evaluation context.
struct Context {
  std::string id;
  std::string dialogue_id;
  Language language;
  std::vector<Turn> turns;

  friend bool operator==(const Context&, const Context&) = default;
};

// "A: ...\nB: ..." with one turn per line.
std::string render_turns(std::span<const Turn> turns);

// Speaker expected to produce the turn after `turns`.
Speaker next_speaker(std::span<const Turn> turns);

void to_json(nlohmann::json& j, const Turn& t);
void from_json(const nlohmann::json& j, Turn& t);
void to_json(nlohmann::json& j, const Language& l);
void from_json(const nlohmann::json& j, Language& l);
void to_json(nlohmann::json& j, const Dialogue& d);
void from_json(const nlohmann::json& j, Dialogue& d);

}  // namespace coheval
