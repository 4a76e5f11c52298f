#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "coheval/types.hpp"

namespace coheval {

// Gold coherence label.
enum class Label { Yes, No };

// Evaluator output class. Unparseable is a value, never an error.
enum class Verdict { Yes, No, Unparseable };

std::string_view to_string(Label l);
std::string_view to_string(Verdict v);
Label label_from_string(std::string_view s);
Verdict verdict_from_string(std::string_view s);

struct ResponseText {
  std::string response;
  std::string explanation;

  friend bool operator==(const ResponseText&, const ResponseText&) = default;
};

// One GenResCoh record: a context plus one coherent and one incoherent
// continuation, each with its explanation.
struct ResponsePair {
  std::string context_id;
  std::string dialogue_id;
  Language language;
  std::vector<Turn> context;
  ResponseText positive;
  ResponseText negative;
  std::string generator_model;

  friend bool operator==(const ResponsePair&, const ResponsePair&) = default;
};

struct EvalSample {
  std::string sample_id;
  Language language;
  std::vector<Turn> context;
  std::string response;
  Label label = Label::Yes;
  std::optional<std::string> reference_explanation;

  friend bool operator==(const EvalSample&, const EvalSample&) = default;
};

struct Prediction {
  std::string sample_id;
  Verdict verdict = Verdict::Unparseable;
  std::string explanation;
  std::string raw_output;
  std::string model_name;
  // Set when the endpoint failed after retries; verdict is Unparseable then.
  std::optional<std::string> transport_error;

  // Yes -> 1, No -> 0, absent for Unparseable.
  std::optional<int> score() const;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

void to_json(nlohmann::json& j, const ResponseText& r);
void from_json(const nlohmann::json& j, ResponseText& r);
void to_json(nlohmann::json& j, const ResponsePair& p);
void from_json(const nlohmann::json& j, ResponsePair& p);
void to_json(nlohmann::json& j, const EvalSample& s);
void from_json(const nlohmann::json& j, EvalSample& s);
void to_json(nlohmann::json& j, const Prediction& p);
void from_json(const nlohmann::json& j, Prediction& p);

}  // namespace coheval
