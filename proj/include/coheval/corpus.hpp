#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coheval/errors.hpp"
#include "coheval/types.hpp"

namespace coheval::corpus {

// Registered source adapters. String ids: "xdailydialog", "xpersona",
// "normalized".
enum class SourceFormat { XDailyDialog, XPersona, Normalized };

SourceFormat format_from_string(std::string_view id);
std::string_view to_string(SourceFormat f);

struct LoadOptions {
  // Raw sources carry no language/split; these fill them in. Records that
  // state their own language or split keep it.
  Language language;
  Split split = Split::Train;
  // Prefix for generated dialogue ids; defaults to "<format>-<lang>-<split>".
  std::string id_prefix;
  // XPersona only: prepend the persona sentences as one leading turn.
  bool include_personas = false;
};

struct LoadReport {
  std::vector<Dialogue> dialogues;
  std::size_t skipped = 0;
  // "<source>:<record>: <reason>", one per skipped or repaired record.
  std::vector<std::string> warnings;
};

// Throws DataError if the file cannot be read or is not valid for the format.
LoadReport load_dialogues(const std::filesystem::path& path, SourceFormat format,
                          const LoadOptions& options = {});
LoadReport parse_dialogues(std::string_view content, SourceFormat format, const LoadOptions& options,
                           std::string_view source_name = "<memory>");

// Restores the two-party invariant: trims texts, drops empty turns, merges
// consecutive same-speaker turns with a space, and relabels so the first
// speaker is A.
std::vector<Turn> normalize_turns(std::vector<Turn> turns);

// Untagged utterances alternate A, B, A, ...
std::vector<Turn> turns_from_utterances(std::span<const std::string> utterances);

// Lowercased, NFC-normalized concatenation of the turn texts with all
// whitespace collapsed.
std::string dedup_key(const Dialogue& d);

struct DedupReport {
  std::size_t test_before = 0;
  std::size_t removed = 0;
  double removed_fraction = 0.0;
  std::vector<std::string> removed_ids;
};

struct DedupResult {
  std::vector<Dialogue> test;
  DedupReport report;
};

// Drops test dialogues whose dedup_key also occurs in train or validation.
DedupResult dedup_splits(std::span<const Dialogue> train, std::span<const Dialogue> validation,
                         std::span<const Dialogue> test);

std::string context_id(std::string_view dialogue_id, std::size_t length);

// Prefixes of length 2 .. |turns|-1. Dialogues shorter than 3 turns yield
// nothing.
std::vector<Context> window_contexts(const Dialogue& d);
std::vector<Context> window_contexts(std::span<const Dialogue> dialogues);

// Jaccard similarity of the two token sets.
double token_overlap(std::string_view a, std::string_view b, const Language& language);

class PoolExhausted : public DataError {
 public:
  using DataError::DataError;
};

struct NegativeSamplingOptions {
  std::size_t n = 1;
  std::uint64_t seed = 0;
  double overlap_threshold = 0.5;
};

// Seeded draws without replacement from the turns of `pool`, rejecting any
// candidate whose token overlap with `ground_truth_next` exceeds the
// threshold. `pool` must not contain the context's source dialogue.
std::vector<std::string> sample_random_negatives(const Context& ctx, std::string_view ground_truth_next,
                                                 std::span<const Dialogue> pool,
                                                 const NegativeSamplingOptions& options);

}  // namespace coheval::corpus
