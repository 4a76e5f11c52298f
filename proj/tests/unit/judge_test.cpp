#include <gtest/gtest.h>

#include "coheval/judge.hpp"
#include "mock_endpoint.hpp"

namespace coheval::judge {
namespace {

using nlohmann::json;
using testing::completion_body;
using testing::FakeTransport;
using testing::MockReply;

TEST(JudgeScore, FinalLineOnly) {
  EXPECT_EQ(parse_judge_score("Clear and specific.\nScore: 4"), 4);
  EXPECT_EQ(parse_judge_score("**Score:** 5"), 5);
  EXPECT_EQ(parse_judge_score("score: 1.\n"), 1);
  EXPECT_EQ(parse_judge_score("Score: 6"), std::nullopt);
  EXPECT_EQ(parse_judge_score("Score: 0"), std::nullopt);
  EXPECT_EQ(parse_judge_score("Score: 3\nThanks!"), std::nullopt);
  EXPECT_EQ(parse_judge_score("I would give it a 4"), std::nullopt);
}

TEST(JudgePrompt, ReferenceBlockIsTheOnlyDifference) {
  const std::vector<Turn> context = {{Speaker::A, "Lunch?"}, {Speaker::B, "Sure."}};
  const auto with = build_judge_prompt(context, "Noodles?", "Proposes a place.", "Suggests a concrete option.");
  const auto without = build_judge_prompt(context, "Noodles?", "Proposes a place.", std::nullopt);
  EXPECT_EQ(with[0], without[0]);
  const std::string block = "\n\nReference explanation:\nSuggests a concrete option.";
  auto expected = with[1].content;
  expected.erase(expected.find(block), block.size());
  EXPECT_EQ(expected, without[1].content);
  EXPECT_NE(without[1].content.find("A: Noodles?"), std::string::npos);
}

TEST(Selection, ValidatesSize) {
  EXPECT_EQ(select_sample(5, std::nullopt, 1), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_THROW(select_sample(5, 6, 1), DataError);
  EXPECT_EQ(select_sample(5, 5, 1).size(), 5u);
}

struct Fixture {
  std::vector<EvalSample> samples;
  std::vector<Prediction> predictions;
};

Fixture fixture() {
  Fixture f;
  for (int i = 0; i < 6; ++i) {
    const auto id = "s" + std::to_string(i);
    f.samples.push_back({id, Language("en"), {{Speaker::A, "hi"}, {Speaker::B, "hey"}}, "r" + std::to_string(i),
                         Label::Yes, std::string("ref")});
    f.predictions.push_back({id, Verdict::Yes, "because " + std::to_string(i), "", "evaluated", {}});
  }
  f.predictions[4].explanation = "  ";
  f.predictions[5].transport_error = "HTTP 503";
  return f;
}

TEST(JudgeRun, ReAsksOnceThenCountsInvalid) {
  const auto f = fixture();
  std::map<std::string, int> calls;
  std::mutex mutex;
  auto transport = std::make_shared<FakeTransport>([&](const json& req) {
    const auto prompt = testing::last_user_message(req);
    std::lock_guard lock(mutex);
    const int n = ++calls[prompt];
    if (prompt.find("because 0") != std::string::npos) return MockReply{200, completion_body("Good.\nScore: 5")};
    if (prompt.find("because 1") != std::string::npos) {
      return MockReply{200, completion_body(n == 1 ? "I think it is fine." : "Score: 3")};
    }
    if (prompt.find("because 2") != std::string::npos) return MockReply{200, completion_body("No idea.")};
    return MockReply{200, completion_body("Score: 1")};
  });
  llm::ChatClient client(testing::test_endpoint("http://judge.invalid/v1", "judge"), transport);
  const auto run = judge_explanations(f.predictions, f.samples, {}, client, nullptr);
  EXPECT_EQ(run.sampled_ids, (std::vector<std::string>{"s0", "s1", "s2", "s3"}));
  EXPECT_EQ(run.invalid_ids, std::vector<std::string>{"s2"});
  ASSERT_EQ(run.verdicts.size(), 3u);
  EXPECT_EQ(run.verdicts[0].rationale, "Good.");
  EXPECT_EQ(run.verdicts[1].score, 3);
  EXPECT_EQ(run.summary.judged, 3u);
  EXPECT_EQ(run.summary.invalid, 1u);
  EXPECT_DOUBLE_EQ(run.summary.mean, 3.0);
  EXPECT_EQ(run.summary.judge_model, "judge");
  EXPECT_EQ(transport->calls(), 1u + 2u + 2u + 1u);

  const json j = run.verdicts[0];
  EXPECT_EQ(j.at("score"), 5);
  EXPECT_EQ(j.get<JudgeVerdict>().sample_id, "s0");
}

TEST(JudgeRun, RequestsMoreThanEligibleFail) {
  const auto f = fixture();
  auto transport = std::make_shared<FakeTransport>([](const json&) { return MockReply{200, completion_body("Score: 2")}; });
  llm::ChatClient client(testing::test_endpoint("http://judge.invalid/v1", "judge"), transport);
  JudgeOptions options;
  options.n = 5;
  EXPECT_THROW(judge_explanations(f.predictions, f.samples, options, client, nullptr), DataError);
}

TEST(JudgeRun, AllInvalidIsAnError) {
  const auto f = fixture();
  auto transport = std::make_shared<FakeTransport>([](const json&) { return MockReply{200, completion_body("meh")}; });
  llm::ChatClient client(testing::test_endpoint("http://judge.invalid/v1", "judge"), transport);
  EXPECT_THROW(judge_explanations(f.predictions, f.samples, {}, client, nullptr), DataError);
}

}  // namespace
}  // namespace coheval::judge
