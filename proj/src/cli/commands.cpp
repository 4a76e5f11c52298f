#include "coheval/cli.hpp"

#include "coheval/corpus.hpp"
#include "coheval/errors.hpp"
#include "coheval/eval_harness.hpp"
#include "coheval/generation.hpp"
#include "coheval/jsonl.hpp"
#include "coheval/judge.hpp"
#include "coheval/metrics.hpp"
#include "coheval/statistics.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <functional>
#include <set>

namespace coheval::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string cache_dir;
  std::vector<std::string> languages;
  std::string generator_url, generator_model;
  std::string evaluator_url, evaluator_model;
  std::string judge_url, judge_model;
  std::optional<int> max_in_flight;
};

struct ShotOptions {
  std::string mode = "zero";
  std::string example_file;
  std::string example_language = "en";
  std::string order = "explanation-first";
};

class Session {
 public:
  Session(PipelineConfig cfg, std::ostream& out, std::ostream& err) : cfg_(std::move(cfg)), out_(out), err_(err) {
    if (!cfg_.cache_root.empty()) cache_.emplace(cfg_.cache_root);
  }

  PipelineConfig& cfg() { return cfg_; }
  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }
  const llm::ResponseCache* cache() const { return cache_ ? &*cache_ : nullptr; }

  std::uint64_t require_seed(std::string_view command) const {
    if (!cfg_.seed) throw UsageError(std::string(command) + " samples randomly and needs --seed (or seed in config)");
    return *cfg_.seed;
  }

  std::unique_ptr<llm::ChatClient> client(const std::optional<llm::EndpointConfig>& endpoint,
                                          std::string_view role) const {
    if (!endpoint || endpoint->base_url.empty()) {
      throw UsageError("no " + std::string(role) + " endpoint configured (set [" + std::string(role) +
                       "] base_url or --" + std::string(role) + "-url)");
    }
    if (endpoint->model_name.empty()) throw UsageError(std::string(role) + " endpoint has no model_name");
    return std::make_unique<llm::ChatClient>(*endpoint, nullptr, cfg_.seed.value_or(0));
  }

  bool language_selected(const Language& language) const {
    return cfg_.languages.empty() ||
           std::find(cfg_.languages.begin(), cfg_.languages.end(), language.code()) != cfg_.languages.end();
  }

 private:
  PipelineConfig cfg_;
  std::ostream& out_;
  std::ostream& err_;
  std::optional<llm::ResponseCache> cache_;
};

fs::path require_path(const std::string& flag_value, const fs::path& fallback, std::string_view what) {
  fs::path p = flag_value.empty() ? fallback : fs::path(flag_value);
  if (p.empty()) throw UsageError("missing " + std::string(what));
  return p;
}

fs::path require_input(const std::string& flag_value, const fs::path& fallback, std::string_view what) {
  auto p = require_path(flag_value, fallback, what);
  if (!fs::exists(p)) throw DataError(std::string(what) + " not found: " + p.string());
  return p;
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

eval::ShotConfig make_shots(const ShotOptions& o) {
  eval::ShotConfig shots;
  if (o.order == "explanation-first") {
    shots.order = eval::AnswerOrder::ExplanationFirst;
  } else if (o.order == "answer-first") {
    shots.order = eval::AnswerOrder::AnswerFirst;
  } else {
    throw UsageError("--order must be explanation-first or answer-first");
  }
  shots.example_language = Language(o.example_language);
  if (o.mode == "zero") {
    shots.mode = eval::ShotMode::ZeroShot;
  } else if (o.mode == "one") {
    shots.mode = eval::ShotMode::OneShot;
    if (o.example_file.empty()) {
      if (shots.example_language.code() != "en") {
        throw UsageError("one-shot with a non-English example needs --example FILE");
      }
      shots.example = eval::default_english_example();
    } else {
      const auto j = json::parse(read_file(o.example_file));
      eval::ShotExample ex;
      ex.context = j.at("context").get<std::vector<Turn>>();
      ex.response = j.at("response").get<std::string>();
      ex.explanation = j.at("explanation").get<std::string>();
      ex.verdict = label_from_string(j.at("verdict").get<std::string>());
      shots.example = std::move(ex);
    }
  } else {
    throw UsageError("--shots must be zero or one");
  }
  return shots;
}

void add_shot_options(CLI::App* sub, ShotOptions& o) {
  sub->add_option("--shots", o.mode, "zero or one")->capture_default_str();
  sub->add_option("--example", o.example_file, "one-shot example (JSON: context, response, explanation, verdict)");
  sub->add_option("--example-language", o.example_language, "language of the one-shot example")
      ->capture_default_str();
  sub->add_option("--order", o.order, "explanation-first or answer-first")->capture_default_str();
}

template <typename T>
std::vector<T> filter_language(std::vector<T> records, const Session& s) {
  std::erase_if(records, [&](const T& r) { return !s.language_selected(r.language); });
  return records;
}

// ---------------------------------------------------------------- commands

struct IngestOptions {
  std::string format, input, output, split = "train";
  bool include_personas = false;
};

int cmd_ingest(Session& s, const IngestOptions& o) {
  corpus::LoadOptions load;
  if (s.cfg().languages.size() > 1) throw UsageError("ingest takes a single --language");
  load.language = Language(s.cfg().languages.empty() ? "en" : s.cfg().languages.front());
  load.split = split_from_string(o.split);
  load.include_personas = o.include_personas;
  const auto input = require_input(o.input, s.cfg().corpus_in, "--input");
  const auto output = require_path(o.output, {}, "--output");
  const auto report = corpus::load_dialogues(input, corpus::format_from_string(o.format), load);
  write_records<Dialogue>(output, report.dialogues);
  for (const auto& w : report.warnings) s.err() << "warning: " << w << '\n';
  s.out() << "ingested " << report.dialogues.size() << " dialogues, skipped " << report.skipped << '\n';
  return kExitOk;
}

struct DedupOptions {
  std::string train, validation, test, output, report;
};

int cmd_dedup(Session& s, const DedupOptions& o) {
  const auto train = read_records<Dialogue>(require_input(o.train, {}, "--train"));
  std::vector<Dialogue> validation;
  if (!o.validation.empty()) validation = read_records<Dialogue>(require_input(o.validation, {}, "--validation"));
  const auto test = read_records<Dialogue>(require_input(o.test, {}, "--test"));
  const auto result = corpus::dedup_splits(train, validation, test);
  write_records<Dialogue>(require_path(o.output, {}, "--output"), result.test);
  if (!o.report.empty()) {
    write_json(o.report, json{{"test_before", result.report.test_before},
                              {"removed", result.report.removed},
                              {"removed_fraction", result.report.removed_fraction},
                              {"removed_ids", result.report.removed_ids}});
  }
  s.out() << "removed " << result.report.removed << " of " << result.report.test_before
          << " test dialogues (fraction " << result.report.removed_fraction << ")\n";
  return kExitOk;
}

struct GenerateOptions {
  std::string corpus, output, failures, split;
  std::optional<std::size_t> max_contexts;
};

int cmd_generate(Session& s, const GenerateOptions& o) {
  auto dialogues = filter_language(read_records<Dialogue>(require_input(o.corpus, s.cfg().corpus_in, "--corpus")), s);
  if (!o.split.empty()) {
    const auto split = split_from_string(o.split);
    std::erase_if(dialogues, [&](const Dialogue& d) { return d.split != split; });
  }
  auto contexts = corpus::window_contexts(dialogues);
  if (o.max_contexts && *o.max_contexts < contexts.size()) {
    std::vector<Context> chosen;
    for (auto i : judge::select_sample(contexts.size(), *o.max_contexts, s.require_seed("generate --max-contexts"))) {
      chosen.push_back(std::move(contexts[i]));
    }
    contexts = std::move(chosen);
  }
  auto cfg = s.cfg().generation;
  if (s.cfg().example_block_file) cfg.example_block = read_file(*s.cfg().example_block_file);
  const auto output = require_path(o.output, s.cfg().dataset_out, "--output");
  auto client = s.client(s.cfg().generator, "generator");

  const auto run = gen::generate_dataset(contexts, cfg, *client, s.cache());
  write_records<ResponsePair>(output, run.pairs);
  json failures = json::array();
  for (const auto& f : run.failures) {
    failures.push_back(
        {{"context_id", f.context_id}, {"attempts", f.attempts}, {"reason", f.reason}, {"transport", f.transport}});
  }
  fs::path failure_path = o.failures.empty() ? fs::path(output.string() + ".failures.json") : fs::path(o.failures);
  write_json(failure_path, json{{"contexts", contexts.size()},
                                {"generated", run.pairs.size()},
                                {"failed", run.failures.size()},
                                {"failures", failures}});
  s.out() << "generated " << run.pairs.size() << " pairs from " << contexts.size() << " contexts, "
          << run.failures.size() << " failed\n";
  if (!contexts.empty() && run.pairs.empty() &&
      std::all_of(run.failures.begin(), run.failures.end(), [](const auto& f) { return f.transport; })) {
    s.err() << "generate: every context failed at the transport level\n";
    return kExitTransport;
  }
  return kExitOk;
}

struct StatsOptions {
  std::string dataset, output, table, grouping = "script";
};

int cmd_stats(Session& s, const StatsOptions& o) {
  const auto pairs =
      filter_language(read_records<ResponsePair>(require_input(o.dataset, s.cfg().dataset_out, "--dataset")), s);
  stats::Grouping grouping;
  if (o.grouping == "all") {
    grouping = stats::Grouping::All;
  } else if (o.grouping == "language") {
    grouping = stats::Grouping::Language;
  } else if (o.grouping == "script") {
    grouping = stats::Grouping::Script;
  } else {
    throw UsageError("--grouping must be all, language or script");
  }
  const auto report = stats::dataset_stats(pairs, grouping);
  for (const auto& w : report.warnings) s.err() << "warning: " << w << '\n';
  const auto table = stats::render_table(report);
  if (!o.output.empty()) write_json(o.output, report);
  if (!o.table.empty()) write_file_atomic(o.table, table);
  s.out() << table;
  return kExitOk;
}

struct MakeSamplesOptions {
  std::string dataset, output;
};

int cmd_make_samples(Session& s, const MakeSamplesOptions& o) {
  const auto pairs =
      filter_language(read_records<ResponsePair>(require_input(o.dataset, s.cfg().dataset_out, "--dataset")), s);
  const auto samples = eval::samples_from_pairs(pairs);
  write_records<EvalSample>(require_path(o.output, {}, "--output"), samples);
  s.out() << "wrote " << samples.size() << " samples\n";
  return kExitOk;
}

struct EvaluateOptions {
  std::string samples, output;
  ShotOptions shots;
  std::optional<double> temperature, top_p, repetition_penalty;
  std::optional<int> max_tokens;
};

int cmd_evaluate(Session& s, const EvaluateOptions& o) {
  const auto samples = filter_language(read_records<EvalSample>(require_input(o.samples, {}, "--samples")), s);
  auto decode = s.cfg().decode;
  if (o.temperature) decode.temperature = *o.temperature;
  if (o.top_p) decode.top_p = *o.top_p;
  if (o.repetition_penalty) decode.repetition_penalty = *o.repetition_penalty;
  if (o.max_tokens) decode.max_tokens = *o.max_tokens;
  const auto shots = make_shots(o.shots);
  const auto output = require_path(o.output, s.cfg().predictions_out, "--output");
  auto client = s.client(s.cfg().evaluator, "evaluator");

  const auto run = eval::run_evaluation(samples, shots, *client, s.cache(), decode);
  write_records<Prediction>(output, run.predictions);
  s.out() << "evaluated " << run.predictions.size() << " samples, unparseable rate " << run.unparseable_rate << '\n';
  if (!samples.empty() && run.transport_failures == samples.size()) {
    s.err() << "evaluate: every request failed at the transport level\n";
    return kExitTransport;
  }
  return kExitOk;
}

struct ScoreOptions {
  std::string samples, predictions, output, table, human, judge_summary;
};

int cmd_score(Session& s, const ScoreOptions& o) {
  const auto samples = filter_language(read_records<EvalSample>(require_input(o.samples, {}, "--samples")), s);
  auto predictions = read_records<Prediction>(require_input(o.predictions, s.cfg().predictions_out, "--predictions"));
  std::set<std::string> kept;
  for (const auto& sample : samples) kept.insert(sample.sample_id);
  std::erase_if(predictions, [&](const Prediction& p) { return !kept.contains(p.sample_id); });

  std::vector<metrics::HumanAnnotation> human;
  metrics::ScoreOptions options;
  if (!o.human.empty()) {
    human = read_records<metrics::HumanAnnotation>(require_input(o.human, {}, "--human"));
    options.human = &human;
  }
  auto report = metrics::score_predictions(samples, predictions, options);
  if (!o.judge_summary.empty()) {
    report.judge = json::parse(read_file(require_input(o.judge_summary, {}, "--judge-summary")))
                       .get<metrics::JudgeSummary>();
  }
  const auto output = require_path(o.output, s.cfg().report_out, "--output");
  write_json(output, report);
  const std::vector<metrics::MetricsReport> reports{report};
  const auto table = metrics::render_table(reports) + "\n" + metrics::render_confusion(report.confusion);
  if (!o.table.empty()) write_file_atomic(o.table, table);
  s.out() << table;
  return kExitOk;
}

struct JudgeOptions {
  std::string samples, predictions, output, summary;
  std::size_t n = 200;
  bool all = false;
  bool no_reference = false;
};

int cmd_judge(Session& s, const JudgeOptions& o) {
  const auto samples = filter_language(read_records<EvalSample>(require_input(o.samples, {}, "--samples")), s);
  const auto predictions =
      read_records<Prediction>(require_input(o.predictions, s.cfg().predictions_out, "--predictions"));
  std::set<std::string> kept;
  for (const auto& sample : samples) kept.insert(sample.sample_id);
  std::vector<Prediction> selected;
  for (const auto& p : predictions) {
    if (kept.contains(p.sample_id)) selected.push_back(p);
  }

  judge::JudgeOptions options;
  options.with_reference = !o.no_reference;
  if (!o.all) {
    options.n = o.n;
    options.seed = s.require_seed("judge");
  }
  auto client = s.client(s.cfg().judge, "judge");
  const auto run = judge::judge_explanations(selected, samples, options, *client, s.cache());
  write_records<judge::JudgeVerdict>(require_path(o.output, {}, "--output"), run.verdicts);
  if (!o.summary.empty()) write_json(o.summary, run.summary);
  s.out() << "judged " << run.summary.judged << " explanations (" << run.summary.invalid << " invalid): mean "
          << run.summary.mean << " std " << run.summary.std_dev << '\n';
  return kExitOk;
}

struct ExportOptions {
  std::string dataset, output;
  ShotOptions shots;
};

int cmd_export_train(Session& s, const ExportOptions& o) {
  const auto pairs =
      filter_language(read_records<ResponsePair>(require_input(o.dataset, s.cfg().dataset_out, "--dataset")), s);
  const auto records = eval::export_sft_records(pairs, make_shots(o.shots), s.require_seed("export-train"));
  write_records<eval::SftRecord>(require_path(o.output, {}, "--output"), records);
  s.out() << "exported " << records.size() << " training records\n";
  return kExitOk;
}

struct ValidateOptions {
  std::string dataset, output, annotations;
  std::size_t n = 100;
  int threshold = 1;
};

int cmd_validate_sample(Session& s, const ValidateOptions& o) {
  if (!o.annotations.empty()) {
    const auto ratings = gen::read_validation_ratings(read_file(require_input(o.annotations, {}, "--annotations")));
    const auto rate = gen::compute_appropriateness_rate(ratings, o.threshold);
    const json result{{"annotations", ratings.size()}, {"threshold", o.threshold}, {"appropriateness_rate", rate}};
    if (!o.output.empty()) write_json(o.output, result);
    s.out() << result.dump() << '\n';
    return kExitOk;
  }
  const auto pairs =
      filter_language(read_records<ResponsePair>(require_input(o.dataset, s.cfg().dataset_out, "--dataset")), s);
  const auto rows = gen::sample_for_validation(pairs, o.n, s.require_seed("validate-sample"));
  write_file_atomic(require_path(o.output, {}, "--output"), gen::render_validation_sheet(rows));
  s.out() << "wrote " << rows.size() << " rows for annotation\n";
  return kExitOk;
}

void apply_overrides(PipelineConfig& cfg, const CommonOptions& c) {
  if (c.seed) cfg.seed = c.seed;
  if (!c.cache_dir.empty()) cfg.cache_root = c.cache_dir;
  if (!c.languages.empty()) cfg.languages = c.languages;
  auto endpoint = [&](std::optional<llm::EndpointConfig>& slot, const std::string& url, const std::string& model) {
    if (url.empty() && model.empty() && !c.max_in_flight) return;
    if (!slot) slot.emplace();
    if (!url.empty()) slot->base_url = url;
    if (!model.empty()) slot->model_name = model;
    if (c.max_in_flight) slot->max_in_flight = *c.max_in_flight;
  };
  endpoint(cfg.generator, c.generator_url, c.generator_model);
  endpoint(cfg.evaluator, c.evaluator_url, c.evaluator_model);
  endpoint(cfg.judge, c.judge_url, c.judge_model);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coherence dataset generation, evaluation and scoring toolkit", "coheval"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  CommonOptions common;
  app.add_option("--config", common.config_path, "pipeline config file (TOML)");
  app.add_option("--seed", common.seed, "seed for every sampling step");
  app.add_option("--cache-dir", common.cache_dir, "response cache directory");
  app.add_option("--language", common.languages, "language code (repeatable); filters records, sets ingest language");
  app.add_option("--generator-url", common.generator_url, "generator base URL");
  app.add_option("--generator-model", common.generator_model, "generator model name");
  app.add_option("--evaluator-url", common.evaluator_url, "evaluator base URL");
  app.add_option("--evaluator-model", common.evaluator_model, "evaluator model name");
  app.add_option("--judge-url", common.judge_url, "judge base URL");
  app.add_option("--judge-model", common.judge_model, "judge model name");
  app.add_option("--max-in-flight", common.max_in_flight, "concurrent request limit per endpoint");

  IngestOptions ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "normalize a source corpus to JSON lines");
  ingest_cmd->add_option("--format", ingest.format, "xdailydialog, xpersona or normalized")->required();
  ingest_cmd->add_option("--input", ingest.input, "source corpus file");
  ingest_cmd->add_option("--output", ingest.output, "normalized corpus file")->required();
  ingest_cmd->add_option("--split", ingest.split, "train, validation or test")->capture_default_str();
  ingest_cmd->add_flag("--include-personas", ingest.include_personas, "XPersona: keep persona lines as a turn");

  DedupOptions dedup;
  auto* dedup_cmd = app.add_subcommand("dedup", "drop test dialogues that also occur in train/validation");
  dedup_cmd->add_option("--train", dedup.train)->required();
  dedup_cmd->add_option("--validation", dedup.validation);
  dedup_cmd->add_option("--test", dedup.test)->required();
  dedup_cmd->add_option("--output", dedup.output)->required();
  dedup_cmd->add_option("--report", dedup.report, "JSON report path");

  GenerateOptions generate;
  auto* generate_cmd = app.add_subcommand("generate", "generate contrastive response pairs");
  generate_cmd->add_option("--corpus", generate.corpus, "normalized corpus");
  generate_cmd->add_option("--output", generate.output, "GenResCoh record file");
  generate_cmd->add_option("--failures", generate.failures, "failure report (default <output>.failures.json)");
  generate_cmd->add_option("--split", generate.split, "only dialogues of this split");
  generate_cmd->add_option("--max-contexts", generate.max_contexts, "seeded subsample of contexts");

  StatsOptions stats_opts;
  auto* stats_cmd = app.add_subcommand("stats", "dataset statistics (lengths, MTLD)");
  stats_cmd->add_option("--dataset", stats_opts.dataset);
  stats_cmd->add_option("--output", stats_opts.output, "JSON report path");
  stats_cmd->add_option("--table", stats_opts.table, "text table path");
  stats_cmd->add_option("--grouping", stats_opts.grouping, "all, language or script")->capture_default_str();

  MakeSamplesOptions make_samples;
  auto* make_samples_cmd = app.add_subcommand("make-samples", "turn response pairs into labeled samples");
  make_samples_cmd->add_option("--dataset", make_samples.dataset);
  make_samples_cmd->add_option("--output", make_samples.output)->required();

  EvaluateOptions evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "run an evaluator over labeled samples");
  evaluate_cmd->add_option("--samples", evaluate.samples)->required();
  evaluate_cmd->add_option("--output", evaluate.output, "prediction file");
  add_shot_options(evaluate_cmd, evaluate.shots);
  evaluate_cmd->add_option("--temperature", evaluate.temperature);
  evaluate_cmd->add_option("--top-p", evaluate.top_p);
  evaluate_cmd->add_option("--repetition-penalty", evaluate.repetition_penalty);
  evaluate_cmd->add_option("--max-tokens", evaluate.max_tokens);

  ScoreOptions score;
  auto* score_cmd = app.add_subcommand("score", "compute metrics for a prediction file");
  score_cmd->add_option("--samples", score.samples)->required();
  score_cmd->add_option("--predictions", score.predictions);
  score_cmd->add_option("--output", score.output, "MetricsReport JSON path");
  score_cmd->add_option("--table", score.table, "text table path");
  score_cmd->add_option("--human", score.human, "human annotations (sample_id, ratings, scale_max)");
  score_cmd->add_option("--judge-summary", score.judge_summary, "summary written by the judge command");

  JudgeOptions judge_opts;
  auto* judge_cmd = app.add_subcommand("judge", "rate explanation quality with a judge model");
  judge_cmd->add_option("--samples", judge_opts.samples)->required();
  judge_cmd->add_option("--predictions", judge_opts.predictions);
  judge_cmd->add_option("--output", judge_opts.output, "judge verdict file")->required();
  judge_cmd->add_option("--summary", judge_opts.summary, "summary JSON path");
  judge_cmd->add_option("--n", judge_opts.n, "number of explanations to judge")->capture_default_str();
  judge_cmd->add_flag("--all", judge_opts.all, "judge every eligible explanation");
  judge_cmd->add_flag("--no-reference", judge_opts.no_reference, "reference-free judging");

  ExportOptions export_opts;
  auto* export_cmd = app.add_subcommand("export-train", "export chat-format fine-tuning records");
  export_cmd->add_option("--dataset", export_opts.dataset);
  export_cmd->add_option("--output", export_opts.output)->required();
  add_shot_options(export_cmd, export_opts.shots);

  ValidateOptions validate;
  auto* validate_cmd = app.add_subcommand("validate-sample", "draw a human-validation sheet or score one");
  validate_cmd->add_option("--dataset", validate.dataset);
  validate_cmd->add_option("--output", validate.output, "TSV sheet (or JSON result with --annotations)");
  validate_cmd->add_option("--n", validate.n, "rows to sample")->capture_default_str();
  validate_cmd->add_option("--annotations", validate.annotations, "annotated sheet to score");
  validate_cmd->add_option("--threshold", validate.threshold, "lowest appropriate rating")->capture_default_str();

  std::vector<std::string> argv_tail(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(argv_tail.begin(), argv_tail.end());
  try {
    app.parse(argv_tail);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "coheval: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  std::string command = app.get_subcommands().front()->get_name();
  try {
    PipelineConfig cfg = common.config_path.empty() ? PipelineConfig{} : load_config(common.config_path);
    apply_overrides(cfg, common);
    Session session(std::move(cfg), out, err);
    if (command == "ingest") return cmd_ingest(session, ingest);
    if (command == "dedup") return cmd_dedup(session, dedup);
    if (command == "generate") return cmd_generate(session, generate);
    if (command == "stats") return cmd_stats(session, stats_opts);
    if (command == "make-samples") return cmd_make_samples(session, make_samples);
    if (command == "evaluate") return cmd_evaluate(session, evaluate);
    if (command == "score") return cmd_score(session, score);
    if (command == "judge") return cmd_judge(session, judge_opts);
    if (command == "export-train") return cmd_export_train(session, export_opts);
    if (command == "validate-sample") return cmd_validate_sample(session, validate);
    err << "coheval: unhandled subcommand " << command << '\n';
    return kExitInternal;
  } catch (const UsageError& e) {
    err << "coheval " << command << ": usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const TransportError& e) {
    err << "coheval " << command << ": transport error: " << e.what() << '\n';
    return kExitTransport;
  } catch (const DataError& e) {
    err << "coheval " << command << ": data error: " << e.what() << '\n';
    return kExitData;
  } catch (const json::exception& e) {
    err << "coheval " << command << ": data error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "coheval " << command << ": data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "coheval " << command << ": internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace coheval::cli
