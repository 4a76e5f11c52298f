#include "coheval/records.hpp"

#include "coheval/errors.hpp"

namespace coheval {

std::string_view to_string(Label l) { return l == Label::Yes ? "Yes" : "No"; }

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Yes:
      return "Yes";
    case Verdict::No:
      return "No";
    case Verdict::Unparseable:
      return "Unparseable";
  }
  return "Unparseable";
}

Label label_from_string(std::string_view s) {
  if (s == "Yes") return Label::Yes;
  if (s == "No") return Label::No;
  throw DataError("invalid label '" + std::string(s) + "' (expected Yes or No)");
}

Verdict verdict_from_string(std::string_view s) {
  if (s == "Yes") return Verdict::Yes;
  if (s == "No") return Verdict::No;
  if (s == "Unparseable") return Verdict::Unparseable;
  throw DataError("invalid verdict '" + std::string(s) + "'");
}

std::optional<int> Prediction::score() const {
  switch (verdict) {
    case Verdict::Yes:
      return 1;
    case Verdict::No:
      return 0;
    case Verdict::Unparseable:
      return std::nullopt;
  }
  return std::nullopt;
}

void to_json(nlohmann::json& j, const ResponseText& r) {
  j = nlohmann::json{{"response", r.response}, {"explanation", r.explanation}};
}

void from_json(const nlohmann::json& j, ResponseText& r) {
  r.response = j.at("response").get<std::string>();
  r.explanation = j.at("explanation").get<std::string>();
}

void to_json(nlohmann::json& j, const ResponsePair& p) {
  j = nlohmann::json{{"context_id", p.context_id},
                     {"dialogue_id", p.dialogue_id},
                     {"language", p.language},
                     {"context", p.context},
                     {"positive", p.positive},
                     {"negative", p.negative},
                     {"generator_model", p.generator_model}};
}

void from_json(const nlohmann::json& j, ResponsePair& p) {
  p.context_id = j.at("context_id").get<std::string>();
  p.dialogue_id = j.at("dialogue_id").get<std::string>();
  p.language = j.at("language").get<Language>();
  p.context = j.at("context").get<std::vector<Turn>>();
  p.positive = j.at("positive").get<ResponseText>();
  p.negative = j.at("negative").get<ResponseText>();
  p.generator_model = j.value("generator_model", std::string{});
}

void to_json(nlohmann::json& j, const EvalSample& s) {
  j = nlohmann::json{{"sample_id", s.sample_id},
                     {"language", s.language},
                     {"context", s.context},
                     {"response", s.response},
                     {"label", to_string(s.label)}};
  if (s.reference_explanation) j["reference_explanation"] = *s.reference_explanation;
}

void from_json(const nlohmann::json& j, EvalSample& s) {
  s.sample_id = j.at("sample_id").get<std::string>();
  s.language = j.at("language").get<Language>();
  s.context = j.at("context").get<std::vector<Turn>>();
  s.response = j.at("response").get<std::string>();
  s.label = label_from_string(j.at("label").get<std::string>());
  s.reference_explanation.reset();
  if (auto it = j.find("reference_explanation"); it != j.end() && !it->is_null()) {
    s.reference_explanation = it->get<std::string>();
  }
}

void to_json(nlohmann::json& j, const Prediction& p) {
  j = nlohmann::json{{"sample_id", p.sample_id},
                     {"verdict", to_string(p.verdict)},
                     {"explanation", p.explanation},
                     {"raw_output", p.raw_output},
                     {"model_name", p.model_name}};
  if (auto s = p.score()) {
    j["score"] = *s;
  } else {
    j["score"] = nullptr;
  }
  if (p.transport_error) j["transport_error"] = *p.transport_error;
}

void from_json(const nlohmann::json& j, Prediction& p) {
  p.sample_id = j.at("sample_id").get<std::string>();
  p.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  p.explanation = j.value("explanation", std::string{});
  p.raw_output = j.value("raw_output", std::string{});
  p.model_name = j.value("model_name", std::string{});
  p.transport_error.reset();
  if (auto it = j.find("transport_error"); it != j.end() && !it->is_null()) {
    p.transport_error = it->get<std::string>();
  }
}

}  // namespace coheval
