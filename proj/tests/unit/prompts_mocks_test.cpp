#include <gtest/gtest.h>

#include <filesystem>

#include "inkeval/error.hpp"
#include "inkeval/mocks.hpp"
#include "inkeval/parser.hpp"
#include "inkeval/prompts.hpp"

using namespace inkeval;
namespace fs = std::filesystem;

TEST(Prompts, ExpertTemplateAndGuide) {
  const auto with = prompts::expert_cot(true);
  const auto without = prompts::expert_cot(false);
  EXPECT_TRUE(with.starts_with(without));
  EXPECT_GT(with.size(), without.size());
  EXPECT_NE(with.find("最终分数"), std::string::npos);
  EXPECT_FALSE(prompts::score_format_reminder().empty());
}

TEST(Prompts, T2iPromptParsing) {
  const auto got = prompts::parse_t2i_prompts(
      "intro\n[Prompt1]: 一幅山水画，远山。\n\n[Prompt2]: 墨竹\n多行描述\n[Prompt3]:  梅花  ");
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got[0], "一幅山水画，远山。");
  EXPECT_EQ(got[2], "梅花");
  EXPECT_TRUE(prompts::parse_t2i_prompts("no prompts here").empty());
}

TEST(Prompts, CotRounds) {
  for (int r = 1; r <= prompts::kCotRounds; ++r) EXPECT_FALSE(prompts::cot_round(r, 10, 20).empty());
  EXPECT_NE(prompts::cot_round(2, 1234, 567).find("1234"), std::string::npos);
  EXPECT_THROW(prompts::cot_round(0, 1, 1), Error);
  EXPECT_THROW(prompts::cot_round(6, 1, 1), Error);
  EXPECT_EQ(prompts::round_marker(2), "感兴趣区域");
  EXPECT_EQ(prompts::round_marker(1), "");
}

TEST(Prompts, PreconditioningRoundTrip) {
  for (int s = 0; s <= 5; ++s) {
    for (auto p : {Provenance::Authentic, Provenance::Synthetic}) {
      const auto got = prompts::parse_preconditioning(prompts::preconditioning(Score(s), p));
      ASSERT_TRUE(got);
      EXPECT_EQ(got->score.value(), s);
      EXPECT_EQ(got->provenance, p);
    }
  }
  EXPECT_FALSE(prompts::parse_preconditioning("hello"));
}

TEST(Mocks, SyntheticResponseDeterministicAndValid) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto a = mocks::synthetic_response(seed, Score(static_cast<int>(seed % 6)));
    EXPECT_EQ(a, mocks::synthetic_response(seed, Score(static_cast<int>(seed % 6))));
    EXPECT_TRUE(has_all_parts(a));
    EXPECT_GE(a.rois.size(), 1u);
    EXPECT_LE(a.rois.size(), 4u);
    const auto report = parse_expert_response(render_expert_response(a, Language::Chinese, 100, 100),
                                              100, 100);
    ASSERT_TRUE(report.complete) << seed;
    EXPECT_EQ(report.score, a.final_score);
  }
}

TEST(Mocks, PlaceholderCarriesSeed) {
  GenerationRequest r{"寒江独钓", Aspect::Hanging, "m", 42};
  const auto bytes = mocks::placeholder_image(r);
  EXPECT_EQ(bytes, mocks::placeholder_image(r));
  const auto info = mocks::read_placeholder(bytes);
  ASSERT_TRUE(info);
  EXPECT_EQ(info->seed, 42);
  EXPECT_EQ(info->width, 32);
  EXPECT_EQ(info->height, 64);
  r.prompt = "other";
  EXPECT_NE(bytes, mocks::placeholder_image(r));
  EXPECT_FALSE(mocks::read_placeholder("\x89PNG...."));
}

TEST(Mocks, EvaluatorScoresAndRecovers) {
  const fs::path dir = fs::temp_directory_path() / ("inkeval_mock_eval_" + std::to_string(::getpid()));
  auto store = std::make_shared<ContentStore>(dir);
  const auto ref = store->put(mocks::placeholder_image({"p", Aspect::Square, "m", 7}));
  auto handler = mocks::evaluator(store, [](std::int64_t seed) {
    return mocks::MockVerdict{static_cast<int>(seed % 6), true};
  });
  ChatRequest req;
  req.messages.push_back({"user", prompts::expert_cot(), ref});
  const auto first = parse_expert_response(handler(req));
  EXPECT_FALSE(first.score);
  req.messages.push_back({"assistant", "...", std::nullopt});
  req.messages.push_back({"user", std::string(prompts::score_format_reminder()), std::nullopt});
  const auto second = parse_expert_response(handler(req));
  EXPECT_EQ(second.score, Score(1));

  ChatRequest no_image;
  no_image.messages.push_back({"user", "x", std::nullopt});
  EXPECT_THROW(handler(no_image), Error);
  fs::remove_all(dir);
}

TEST(Mocks, ConstructorFollowsDisclosedScore) {
  auto handler = mocks::constructor();
  ChatRequest req;
  req.messages.push_back({"system", prompts::preconditioning(Score(3), Provenance::Authentic),
                          std::nullopt});
  for (int round = 1; round <= 5; ++round) {
    req.messages.push_back({"user", prompts::cot_round(round, 1000, 1000),
                            round == 1 ? std::optional<std::string>("img.png") : std::nullopt});
    const auto reply = handler(req);
    EXPECT_FALSE(reply.empty());
    if (round == 5) EXPECT_EQ(reply, "最终分数: 3");
    req.messages.push_back({"assistant", reply, std::nullopt});
  }
  ChatRequest t2i;
  t2i.messages.push_back({"user", std::string(prompts::t2i_prompt_generation()), std::nullopt});
  EXPECT_EQ(prompts::parse_t2i_prompts(handler(t2i)).size(),
            static_cast<std::size_t>(prompts::kT2iPromptCount));
}

TEST(Mocks, CannedBackendCounts) {
  auto b = mocks::MockChatBackend::canned("fixed");
  ChatRequest r;
  r.messages.push_back({"user", "x", std::nullopt});
  EXPECT_EQ(b->complete(r), "fixed");
  EXPECT_EQ(b->complete(r), "fixed");
  EXPECT_EQ(b->calls(), 2);
}
