#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "coheval/judge.hpp"
#include "coheval/parallel.hpp"
#include "mock_endpoint.hpp"
#include "temp_dir.hpp"

namespace coheval {
namespace {

TEST(Acceptance, C8_CacheAndConcurrency) {
  testing::MockServer server(
      [](const nlohmann::json& request) {
        return testing::MockReply{200, testing::completion_body("echo: " + testing::last_user_message(request))};
      },
      std::chrono::milliseconds(25));
  testing::TempDir dir;
  const llm::ResponseCache cache(dir / "cache");
  const int max_in_flight = 3;

  std::vector<llm::ChatRequest> requests;
  for (int i = 0; i < 30; ++i) {
    llm::ChatRequest r;
    r.model_name = "mock-model";
    r.messages = {{llm::Role::User, "question " + std::to_string(i % 24)}};
    requests.push_back(r);  // 24 distinct, 6 repeated
  }
  auto run_all = [&] {
    llm::ChatClient client(testing::test_endpoint(server.base_url(), "mock-model", max_in_flight));
    auto texts = ordered_parallel_map(requests.size(), 10, [&](std::size_t i) {
      return llm::cached_complete(client, requests[i], &cache).text;
    });
    return texts;
  };

  const auto first = run_all();
  EXPECT_LE(server.peak_in_flight(), max_in_flight);
  EXPECT_GE(server.peak_in_flight(), 2);
  EXPECT_EQ(server.calls(), 24u);
  const auto second = run_all();
  EXPECT_EQ(first, second);
  EXPECT_EQ(server.calls(), 24u);
  const auto per_body = server.calls_per_body();
  EXPECT_EQ(per_body.size(), 24u);
  for (const auto& [body, count] : per_body) EXPECT_EQ(count, 1) << body;
  EXPECT_LE(server.peak_in_flight(), max_in_flight);
}

TEST(Acceptance, C9_JudgeMachinery) {
  const auto a = judge::select_sample(1000, 200, 4242);
  const auto b = judge::select_sample(1000, 200, 4242);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 200u);
  EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), 200u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_LT(a.back(), 1000u);
  EXPECT_NE(judge::select_sample(1000, 200, 4243), a);

  // Scripted judge: the score is fixed by the item number embedded in the
  // candidate response.
  auto script = [](int item) { return item % 5 + 1; };
  std::vector<EvalSample> samples;
  std::vector<Prediction> predictions;
  for (int i = 0; i < 1000; ++i) {
    EvalSample s;
    s.sample_id = "item-" + std::to_string(i);
    s.context = {{Speaker::A, "are you coming tonight"}, {Speaker::B, "maybe"}};
    s.response = "item " + std::to_string(i);
    s.label = i % 2 ? Label::No : Label::Yes;
    s.reference_explanation = "reference " + std::to_string(i);
    samples.push_back(s);
    predictions.push_back({s.sample_id, Verdict::Yes, "explanation " + std::to_string(i), "", "evaluated", {}});
  }
  auto transport = std::make_shared<testing::FakeTransport>([&](const nlohmann::json& request) {
    const auto prompt = testing::last_user_message(request);
    const auto at = prompt.find(": item ");
    const int item = std::stoi(prompt.substr(at + 7));
    return testing::MockReply{200, testing::completion_body("Reasonable.\nScore: " + std::to_string(script(item)))};
  });
  llm::ChatClient client(testing::test_endpoint("http://judge.invalid/v1", "judge-model"), transport);
  judge::JudgeOptions options;
  options.n = 200;
  options.seed = 4242;
  const auto run = judge::judge_explanations(predictions, samples, options, client, nullptr);

  std::vector<std::string> expected_ids;
  double sum = 0;
  for (auto i : a) {
    expected_ids.push_back("item-" + std::to_string(i));
    sum += script(static_cast<int>(i));
  }
  const double mean = sum / 200.0;
  double squares = 0;
  for (auto i : a) squares += (script(static_cast<int>(i)) - mean) * (script(static_cast<int>(i)) - mean);
  const double std_dev = std::sqrt(squares / 200.0);

  EXPECT_EQ(run.sampled_ids, expected_ids);
  EXPECT_EQ(run.summary.judged, 200u);
  EXPECT_EQ(run.summary.invalid, 0u);
  EXPECT_NEAR(run.summary.mean, mean, 1e-12);
  EXPECT_NEAR(run.summary.std_dev, std_dev, 1e-12);

  // Alternating 1 and 5 has mean 3 and population std 2.
  std::vector<Prediction> alternating(predictions.begin(), predictions.begin() + 10);
  auto alt_transport = std::make_shared<testing::FakeTransport>([](const nlohmann::json& request) {
    const auto prompt = testing::last_user_message(request);
    const int item = std::stoi(prompt.substr(prompt.find(": item ") + 7));
    return testing::MockReply{200, testing::completion_body(item % 2 ? "Score: 5" : "Score: 1")};
  });
  llm::ChatClient alt_client(testing::test_endpoint("http://judge.invalid/v1", "judge-model"), alt_transport);
  judge::JudgeOptions all;
  const auto alt = judge::judge_explanations(alternating, samples, all, alt_client, nullptr);
  EXPECT_EQ(alt.summary.mean, 3.0);
  EXPECT_EQ(alt.summary.std_dev, 2.0);
}

}  // namespace
}  // namespace coheval
