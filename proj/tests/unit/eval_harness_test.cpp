#include <gtest/gtest.h>

#include "coheval/eval_harness.hpp"
#include "mock_endpoint.hpp"

namespace coheval::eval {
namespace {

using nlohmann::json;
using testing::completion_body;
using testing::FakeTransport;
using testing::MockReply;

EvalSample sample(const std::string& id = "d#2/pos") {
  return {id, Language("en"), {{Speaker::A, "Is it raining?"}, {Speaker::B, "Yes, bring a coat."}},
          "Thanks, I will.", Label::Yes, std::string("Follows the advice.")};
}

TEST(Verdict, TerminalSentence) {
  auto p = parse_verdict("It answers the question. The answer is Yes.");
  EXPECT_EQ(p.verdict, Verdict::Yes);
  EXPECT_EQ(p.explanation, "It answers the question.");
  p = parse_verdict("the answer is: **no**");
  EXPECT_EQ(p.verdict, Verdict::No);
  EXPECT_EQ(p.explanation, "");
}

TEST(Verdict, LastSentenceWins) {
  const auto p = parse_verdict("One might think the answer is yes, but it contradicts B. The answer is No.");
  EXPECT_EQ(p.verdict, Verdict::No);
}

TEST(Verdict, AnswerFirstKeepsTheExplanation) {
  const auto p = parse_verdict("The answer is Yes. The reply follows the advice.");
  EXPECT_EQ(p.verdict, Verdict::Yes);
  EXPECT_EQ(p.explanation, "The reply follows the advice.");
}

TEST(Verdict, FinalLineFallback) {
  auto p = parse_verdict("The reply is on topic.\nYes");
  EXPECT_EQ(p.verdict, Verdict::Yes);
  EXPECT_EQ(p.explanation, "The reply is on topic.");
  EXPECT_EQ(parse_verdict("Hmm.\nyes or no, hard to say").verdict, Verdict::Unparseable);
  EXPECT_EQ(parse_verdict("Nothing useful here.").verdict, Verdict::Unparseable);
  // Word boundaries: "know" and "nobody" are not verdicts.
  EXPECT_EQ(parse_verdict("I know nobody would say that").verdict, Verdict::Unparseable);
  const auto raw = parse_verdict("???");
  EXPECT_EQ(raw.explanation, "???");
}

TEST(Prompt, ZeroShotLayout) {
  const auto messages = build_eval_prompt(sample(), {});
  ASSERT_EQ(messages.size(), 2u);
  EXPECT_EQ(messages[0].role, llm::Role::System);
  const auto& user = messages[1].content;
  EXPECT_EQ(user.rfind("Context:\nA: Is it raining?\nB: Yes, bring a coat.\n\nResponse:\nA: Thanks, I will.\n\n", 0),
            0u);
  EXPECT_NE(user.find(kCoherenceQuestion), std::string::npos);
  EXPECT_EQ(user.find("Here is an example."), std::string::npos);
}

TEST(Prompt, OneShotPrependsTheExample) {
  ShotConfig shots;
  shots.mode = ShotMode::OneShot;
  EXPECT_THROW(build_eval_prompt(sample(), shots), UsageError);
  shots.example = default_english_example();
  const auto user = build_eval_prompt(sample(), shots)[1].content;
  EXPECT_EQ(user.rfind("Here is an example.\n\n", 0), 0u);
  EXPECT_NE(user.find("\nAnswer: " + target_text(shots.example->explanation, Label::Yes)), std::string::npos);
  EXPECT_NE(user.find("Now evaluate the following.\n\nContext:\nA: Is it raining?"), std::string::npos);
}

TEST(Targets, BothOrders) {
  EXPECT_EQ(target_text(" Fits. ", Label::Yes), "Fits. The answer is Yes.");
  EXPECT_EQ(target_text("Off topic.", Label::No, AnswerOrder::AnswerFirst), "The answer is No. Off topic.");
  EXPECT_EQ(target_text("", Label::No), "The answer is No.");
}

TEST(Sft, ExportShapeAndShuffle) {
  ResponsePair pair;
  pair.context_id = "d#2";
  pair.context = sample().context;
  pair.positive = {"Thanks, I will.", "Follows the advice."};
  pair.negative = {"I love trains.", "Unrelated."};
  const std::vector<ResponsePair> pairs(3, pair);
  const auto records = export_sft_records(pairs, {}, 1);
  ASSERT_EQ(records.size(), 6u);
  for (const auto& r : records) {
    const json j = r;
    ASSERT_EQ(j.size(), 1u);
    const auto& messages = j.at("messages");
    ASSERT_EQ(messages.size(), 3u);
    EXPECT_EQ(messages[0].at("role"), "system");
    EXPECT_EQ(messages[1].at("role"), "user");
    EXPECT_EQ(messages[2].at("role"), "assistant");
    EXPECT_EQ(messages[2].at("content"),
              r.label == Label::Yes ? "Follows the advice. The answer is Yes." : "Unrelated. The answer is No.");
  }
  const auto again = export_sft_records(pairs, {}, 1);
  for (std::size_t i = 0; i < records.size(); ++i) EXPECT_EQ(json(records[i]), json(again[i]));
}

TEST(Samples, FromPairs) {
  ResponsePair pair;
  pair.context_id = "x#3";
  pair.positive = {"p", "pe"};
  pair.negative = {"n", "ne"};
  const std::vector<ResponsePair> pairs = {pair};
  const auto samples = samples_from_pairs(pairs);
  ASSERT_EQ(samples.size(), 2u);
  EXPECT_EQ(samples[0].sample_id, "x#3/pos");
  EXPECT_EQ(samples[0].label, Label::Yes);
  EXPECT_EQ(samples[1].sample_id, "x#3/neg");
  EXPECT_EQ(samples[1].reference_explanation, "ne");
}

TEST(RunEvaluation, DecodingParamsAndFailures) {
  auto transport = std::make_shared<FakeTransport>([](const json& req) {
    EXPECT_EQ(req.at("temperature"), 1.0);
    EXPECT_EQ(req.at("top_p"), 0.8);
    EXPECT_EQ(req.at("repetition_penalty"), 1.1);
    EXPECT_EQ(req.at("max_tokens"), 256);
    const auto user = testing::last_user_message(req);
    if (user.find("garble") != std::string::npos) return MockReply{200, completion_body("¯\\_(ツ)_/¯")};
    if (user.find("explode") != std::string::npos) return MockReply{503, "busy"};
    return MockReply{200, completion_body("It follows. The answer is Yes.")};
  });
  auto cfg = testing::test_endpoint("http://eval.invalid/v1", "evaluator", 2);
  cfg.max_attempts = 2;
  llm::ChatClient client(cfg, transport);
  std::vector<EvalSample> samples = {sample("a"), sample("b"), sample("c")};
  samples[1].response = "garble";
  samples[2].response = "explode";
  const auto run = run_evaluation(samples, {}, client, nullptr);
  ASSERT_EQ(run.predictions.size(), 3u);
  EXPECT_EQ(run.predictions[0].verdict, Verdict::Yes);
  EXPECT_EQ(run.predictions[0].explanation, "It follows.");
  EXPECT_EQ(run.predictions[0].model_name, "evaluator");
  EXPECT_EQ(run.predictions[1].verdict, Verdict::Unparseable);
  EXPECT_FALSE(run.predictions[1].transport_error.has_value());
  EXPECT_EQ(run.predictions[2].verdict, Verdict::Unparseable);
  EXPECT_TRUE(run.predictions[2].transport_error.has_value());
  EXPECT_DOUBLE_EQ(run.unparseable_rate, 2.0 / 3.0);
  EXPECT_EQ(run.transport_failures, 1u);
}

}  // namespace
}  // namespace coheval::eval
