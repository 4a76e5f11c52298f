#include "coheval/corpus.hpp"

#include "coheval/jsonl.hpp"
#include "coheval/statistics.hpp"
#include "coheval/unicode.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

namespace coheval::corpus {
namespace {

using nlohmann::json;

struct RecordSink {
  LoadReport& report;
  std::string_view source;
  std::set<std::string> ids;

  void warn(std::size_t record, const std::string& reason) {
    report.warnings.push_back(std::string(source) + ":" + std::to_string(record) + ": " + reason);
  }

  void skip(std::size_t record, const std::string& reason) {
    ++report.skipped;
    warn(record, reason);
  }

  void accept(std::size_t record, Dialogue d) {
    const auto before = d.turns.size();
    d.turns = normalize_turns(std::move(d.turns));
    if (d.turns.size() != before) warn(record, "turns merged or dropped while restoring A/B alternation");
    if (d.turns.size() < 2) {
      skip(record, "dialogue '" + d.id + "' has fewer than 2 turns; skipped");
      return;
    }
    if (!ids.insert(d.id).second) {
      skip(record, "duplicate dialogue_id '" + d.id + "'; skipped");
      return;
    }
    report.dialogues.push_back(std::move(d));
  }
};

std::string default_prefix(SourceFormat format, const LoadOptions& options) {
  if (!options.id_prefix.empty()) return options.id_prefix;
  return std::string(to_string(format)) + "-" + options.language.code() + "-" +
         std::string(to_string(options.split));
}

std::string utterance_text(const json& item) {
  if (item.is_string()) return item.get<std::string>();
  if (item.is_object()) {
    for (const char* key : {"text", "utterance", "content"}) {
      if (auto it = item.find(key); it != item.end() && it->is_string()) return it->get<std::string>();
    }
  }
  throw DataError("utterance is neither a string nor an object with a text field");
}

// Each non-empty line is either DailyDialog's "utt __eou__ utt __eou__" text
// form or a JSON object holding a list of utterances.
void parse_xdailydialog(std::string_view content, const LoadOptions& options, RecordSink& sink) {
  const auto prefix = default_prefix(SourceFormat::XDailyDialog, options);
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    ++line_number;
    auto line = content.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;

    Dialogue d;
    d.language = options.language;
    d.split = options.split;
    d.id = prefix + "-" + std::to_string(line_number);
    std::vector<std::string> utterances;
    try {
      if (text::trim(line).front() == '{') {
        const auto record = json::parse(line);
        const json* list = nullptr;
        for (const char* key : {"dialogue", "dialog", "utterances", "turns"}) {
          if (auto it = record.find(key); it != record.end() && it->is_array()) {
            list = &*it;
            break;
          }
        }
        if (list == nullptr) throw DataError("no dialogue/dialog/utterances/turns array");
        for (const auto& item : *list) utterances.push_back(utterance_text(item));
        for (const char* key : {"dialogue_id", "id"}) {
          if (auto it = record.find(key); it != record.end()) {
            d.id = it->is_string() ? it->get<std::string>() : it->dump();
            break;
          }
        }
        if (auto it = record.find("language"); it != record.end()) d.language = it->get<Language>();
        if (auto it = record.find("split"); it != record.end()) {
          d.split = split_from_string(it->get<std::string>());
        }
      } else {
        static constexpr std::string_view kEou = "__eou__";
        std::size_t start = 0;
        while (start <= line.size()) {
          auto marker = line.find(kEou, start);
          auto piece = line.substr(start, marker == std::string_view::npos ? std::string_view::npos
                                                                           : marker - start);
          if (!text::trim(piece).empty()) utterances.emplace_back(piece);
          if (marker == std::string_view::npos) break;
          start = marker + kEou.size();
        }
      }
    } catch (const std::exception& e) {
      sink.skip(line_number, std::string("malformed record: ") + e.what());
      continue;
    }
    d.turns = turns_from_utterances(utterances);
    sink.accept(line_number, std::move(d));
  }
}

// A JSON array (or JSON lines) of {"persona": [...], "dialogue": [[u, u], ...]}.
void parse_xpersona(std::string_view content, const LoadOptions& options, RecordSink& sink) {
  const auto prefix = default_prefix(SourceFormat::XPersona, options);
  std::vector<std::pair<std::size_t, json>> records;
  const auto trimmed = text::trim(content);
  if (!trimmed.empty() && trimmed.front() == '[') {
    json all;
    try {
      all = json::parse(trimmed);
    } catch (const json::parse_error& e) {
      throw DataError(std::string(sink.source) + ": " + e.what());
    }
    std::size_t index = 0;
    for (auto& r : all) records.emplace_back(++index, std::move(r));
  } else {
    for (auto& line : parse_jsonl(content, sink.source)) records.emplace_back(line.line_number, line.value);
  }

  for (auto& [index, record] : records) {
    Dialogue d;
    d.language = options.language;
    d.split = options.split;
    d.id = prefix + "-" + std::to_string(index);
    std::vector<std::string> utterances;
    try {
      if (!record.is_object()) throw DataError("record is not an object");
      if (options.include_personas) {
        if (auto it = record.find("persona"); it != record.end() && it->is_array()) {
          std::string persona;
          for (const auto& line : *it) {
            if (!persona.empty()) persona.push_back(' ');
            persona += line.get<std::string>();
          }
          if (!persona.empty()) utterances.push_back(std::move(persona));
        }
      }
      const auto& dialogue = record.at("dialogue");
      for (const auto& exchange : dialogue) {
        if (exchange.is_array()) {
          for (const auto& u : exchange) utterances.push_back(utterance_text(u));
        } else {
          utterances.push_back(utterance_text(exchange));
        }
      }
      if (auto it = record.find("dialogue_id"); it != record.end()) d.id = it->get<std::string>();
    } catch (const std::exception& e) {
      sink.skip(index, std::string("malformed record: ") + e.what());
      continue;
    }
    d.turns = turns_from_utterances(utterances);
    sink.accept(index, std::move(d));
  }
}

void parse_normalized(std::string_view content, RecordSink& sink) {
  for (auto& line : parse_jsonl(content, sink.source)) {
    Dialogue d;
    try {
      d = line.value.get<Dialogue>();
    } catch (const std::exception& e) {
      sink.skip(line.line_number, std::string("malformed record: ") + e.what());
      continue;
    }
    sink.accept(line.line_number, std::move(d));
  }
}

}  // namespace

SourceFormat format_from_string(std::string_view id) {
  if (id == "xdailydialog") return SourceFormat::XDailyDialog;
  if (id == "xpersona") return SourceFormat::XPersona;
  if (id == "normalized") return SourceFormat::Normalized;
  throw UsageError("unknown corpus format '" + std::string(id) +
                   "' (expected xdailydialog, xpersona or normalized)");
}

std::string_view to_string(SourceFormat f) {
  switch (f) {
    case SourceFormat::XDailyDialog:
      return "xdailydialog";
    case SourceFormat::XPersona:
      return "xpersona";
    case SourceFormat::Normalized:
      return "normalized";
  }
  return "normalized";
}

LoadReport parse_dialogues(std::string_view content, SourceFormat format, const LoadOptions& options,
                           std::string_view source_name) {
  LoadReport report;
  RecordSink sink{report, source_name, {}};
  switch (format) {
    case SourceFormat::XDailyDialog:
      parse_xdailydialog(content, options, sink);
      break;
    case SourceFormat::XPersona:
      parse_xpersona(content, options, sink);
      break;
    case SourceFormat::Normalized:
      parse_normalized(content, sink);
      break;
  }
  return report;
}

LoadReport load_dialogues(const std::filesystem::path& path, SourceFormat format, const LoadOptions& options) {
  return parse_dialogues(read_file(path), format, options, path.string());
}

std::vector<Turn> normalize_turns(std::vector<Turn> turns) {
  std::vector<Turn> out;
  out.reserve(turns.size());
  for (auto& turn : turns) {
    auto text = text::trim(turn.text);
    if (text.empty()) continue;
    if (!out.empty() && out.back().speaker == turn.speaker) {
      out.back().text += ' ';
      out.back().text += text;
      continue;
    }
    out.push_back({turn.speaker, std::move(text)});
  }
  if (!out.empty() && out.front().speaker == Speaker::B) {
    for (auto& turn : out) turn.speaker = other(turn.speaker);
  }
  return out;
}

std::vector<Turn> turns_from_utterances(std::span<const std::string> utterances) {
  std::vector<Turn> out;
  out.reserve(utterances.size());
  Speaker speaker = Speaker::A;
  for (const auto& u : utterances) {
    out.push_back({speaker, u});
    speaker = other(speaker);
  }
  return out;
}

std::string dedup_key(const Dialogue& d) {
  std::string joined;
  for (const auto& turn : d.turns) {
    if (!joined.empty()) joined.push_back(' ');
    joined += turn.text;
  }
  return text::collapse_whitespace(text::to_lower(text::nfc(joined)));
}

DedupResult dedup_splits(std::span<const Dialogue> train, std::span<const Dialogue> validation,
                         std::span<const Dialogue> test) {
  std::unordered_set<std::string> seen;
  for (const auto& d : train) seen.insert(dedup_key(d));
  for (const auto& d : validation) seen.insert(dedup_key(d));

  DedupResult result;
  result.report.test_before = test.size();
  for (const auto& d : test) {
    if (seen.contains(dedup_key(d))) {
      result.report.removed_ids.push_back(d.id);
    } else {
      result.test.push_back(d);
    }
  }
  result.report.removed = result.report.removed_ids.size();
  result.report.removed_fraction =
      test.empty() ? 0.0 : static_cast<double>(result.report.removed) / static_cast<double>(test.size());
  return result;
}

std::string context_id(std::string_view dialogue_id, std::size_t length) {
  return std::string(dialogue_id) + "#" + std::to_string(length);
}

std::vector<Context> window_contexts(const Dialogue& d) {
  std::vector<Context> out;
  for (std::size_t length = 2; length + 1 <= d.turns.size(); ++length) {
    Context ctx;
    ctx.id = context_id(d.id, length);
    ctx.dialogue_id = d.id;
    ctx.language = d.language;
    ctx.turns.assign(d.turns.begin(), d.turns.begin() + static_cast<std::ptrdiff_t>(length));
    out.push_back(std::move(ctx));
  }
  return out;
}

std::vector<Context> window_contexts(std::span<const Dialogue> dialogues) {
  std::vector<Context> out;
  for (const auto& d : dialogues) {
    auto contexts = window_contexts(d);
    out.insert(out.end(), std::make_move_iterator(contexts.begin()), std::make_move_iterator(contexts.end()));
  }
  return out;
}

double token_overlap(std::string_view a, std::string_view b, const Language& language) {
  const auto ta = stats::tokenize(a, language);
  const auto tb = stats::tokenize(b, language);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t shared = 0;
  for (const auto& t : sa) shared += sb.count(t);
  const auto united = sa.size() + sb.size() - shared;
  return static_cast<double>(shared) / static_cast<double>(united);
}

std::vector<std::string> sample_random_negatives(const Context& ctx, std::string_view ground_truth_next,
                                                 std::span<const Dialogue> pool,
                                                 const NegativeSamplingOptions& options) {
  if (options.n == 0) throw DataError("sample_random_negatives: n must be at least 1");
  std::vector<const std::string*> candidates;
  for (const auto& d : pool) {
    if (d.id == ctx.dialogue_id) {
      throw DataError("negative pool contains the context's own dialogue '" + d.id + "'");
    }
    for (const auto& turn : d.turns) candidates.push_back(&turn.text);
  }

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(options.seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::string> accepted;
  for (auto index : order) {
    const auto& candidate = *candidates[index];
    if (token_overlap(candidate, ground_truth_next, ctx.language) > options.overlap_threshold) continue;
    accepted.push_back(candidate);
    if (accepted.size() == options.n) return accepted;
  }
  throw PoolExhausted("negative pool exhausted after " + std::to_string(accepted.size()) + " of " +
                      std::to_string(options.n) + " candidates at overlap_threshold " +
                      std::to_string(options.overlap_threshold));
}

}  // namespace coheval::corpus
