#include <gtest/gtest.h>

#include <random>

#include "generators.hpp"
#include "inkeval/error.hpp"
#include "inkeval/parser.hpp"
#include "inkeval/reward.hpp"
#include "oracles.hpp"

using namespace inkeval;

namespace {

RoiRegion roi(double x0, double y0, double x1, double y1, std::string desc = "描述") {
  return RoiRegion{"r", std::move(desc), BoundingBox(x0, y0, x1, y1)};
}

// Returns fixed per-pair values in call order.
class ScriptedScorer final : public SimilarityScorer {
 public:
  explicit ScriptedScorer(std::vector<double> values) : values_(std::move(values)) {}
  double similarity(std::string_view, std::string_view) override { return values_.at(next_++); }
  std::string backend_stamp() const override { return "scripted"; }

 private:
  std::vector<double> values_;
  std::size_t next_ = 0;
};

}  // namespace

TEST(AccuracyReward, Examples) {
  EXPECT_EQ(accuracy_reward(Score(3), Score(3)), 1.0);
  EXPECT_EQ(accuracy_reward(Score(0), Score(5)), 0.0);
  EXPECT_DOUBLE_EQ(accuracy_reward(Score(4), Score(5)), 0.8);
  for (int p = 0; p <= 5; ++p)
    for (int g = 0; g <= 5; ++g) EXPECT_EQ(accuracy_reward(Score(p), Score(g)), oracle::accuracy(p, g));
}

TEST(BertReward, Examples) {
  TokenF1Scorer s;
  const std::vector<std::string> gt = {"青绿山水", "远山 孤舟"};
  EXPECT_DOUBLE_EQ(bert_reward(gt, gt, s), 1.0);
  const std::vector<std::string> empty = {"", " "};
  EXPECT_DOUBLE_EQ(bert_reward(empty, gt, s), 0.0);
  const std::vector<std::string> pred = {"青绿山水", "远山 近水 孤舟"};
  EXPECT_DOUBLE_EQ(bert_reward(pred, gt, s), 0.9);
  const std::vector<std::string> one = {"x"};
  EXPECT_THROW(bert_reward(one, gt, s), Error);
  EXPECT_THROW(bert_reward({}, {}, s), Error);
}

TEST(Iou, Examples) {
  const BoundingBox a(0, 0, 1, 1), left(0, 0, 0.5, 1), right(0.5, 0, 1, 1);
  EXPECT_EQ(iou(a, a), 1.0);
  EXPECT_EQ(iou(left, right), 0.0);
  EXPECT_DOUBLE_EQ(iou(a, left), 0.5);
  EXPECT_DOUBLE_EQ(iou(BoundingBox(0, 0, 0.5, 0.5), BoundingBox(0.25, 0.25, 0.75, 0.75)),
                   0.0625 / (0.25 + 0.25 - 0.0625));
}

TEST(MatchBoxes, Examples) {
  const std::vector<RoiRegion> gt = {roi(0, 0, 0.2, 0.2), roi(0.5, 0.5, 1, 1)};
  const std::vector<RoiRegion> one = {roi(0, 0, 0.2, 0.2)};
  EXPECT_EQ(match_boxes(one, std::vector<RoiRegion>{one}), (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}}));
  const std::vector<RoiRegion> two = {roi(0.6, 0.6, 0.9, 0.9), roi(0.5, 0.5, 0.8, 1)};
  EXPECT_EQ(match_boxes(two, gt), (std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 1}}));
  const std::vector<RoiRegion> far = {roi(0.3, 0.0, 0.4, 0.1)};
  EXPECT_EQ(match_boxes(far, gt), (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}}));
  EXPECT_TRUE(match_boxes({}, gt).empty());
  try {
    match_boxes(one, {});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyGt);
  }
}

TEST(MiouReward, Examples) {
  TokenF1Scorer s;
  const std::vector<RoiRegion> gt = {roi(0.1, 0.1, 0.5, 0.5, "主峰雄浑")};
  EXPECT_DOUBLE_EQ(miou_reward(gt, gt, s).value, 2.0);
  EXPECT_EQ(miou_reward({}, gt, s).value, 0.0);
  EXPECT_EQ(miou_reward(gt, {}, s).value, 0.0);

  // (1.0 + 1.0) and (0.5 + 0.0) average to 1.25.
  const std::vector<RoiRegion> gt2 = {roi(0, 0, 1, 1)};
  const std::vector<RoiRegion> pred = {roi(0, 0, 1, 1), roi(0, 0, 0.5, 1)};
  ScriptedScorer scripted({1.0, 0.0});
  const auto r = miou_reward(pred, gt2, scripted);
  EXPECT_DOUBLE_EQ(r.value, 1.25);
  ASSERT_EQ(r.matching.size(), 2u);
  EXPECT_DOUBLE_EQ(r.matching[1].iou, 0.5);
}

TEST(MiouReward, MatchesBruteForce) {
  std::mt19937_64 rng(77);
  TokenF1Scorer s;
  for (int t = 0; t < 500; ++t) {
    std::vector<RoiRegion> pred, gt;
    std::vector<oracle::Box> pb, gb;
    const int np = static_cast<int>(rng() % 5), ng = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < np; ++i) {
      pred.push_back({"p", gen::sentence(rng, Language::Chinese), gen::box(rng)});
      const auto& b = pred.back().box;
      pb.push_back({b.x_min(), b.y_min(), b.x_max(), b.y_max()});
    }
    for (int j = 0; j < ng; ++j) {
      gt.push_back({"g", gen::sentence(rng, Language::Chinese), gen::box(rng)});
      const auto& b = gt.back().box;
      gb.push_back({b.x_min(), b.y_min(), b.x_max(), b.y_max()});
    }
    const auto want = oracle::match(pb, gb);
    EXPECT_EQ(match_boxes(pred, gt), want);
    double sum = 0;
    for (auto [i, j] : want) sum += oracle::iou(pb[i], gb[j]) + token_f1(pred[i].description, gt[j].description);
    const double expect = np ? sum / np : 0.0;
    EXPECT_NEAR(miou_reward(pred, gt, s).value, expect, 1e-12);
  }
}

TEST(FinalReward, GoldAgainstItselfIsSeventeen) {
  std::mt19937_64 rng(3);
  TokenF1Scorer s;
  for (int i = 0; i < 20; ++i) {
    const auto gold = gen::response(rng, Language::Chinese, i % 6, 1 + i % 4);
    const auto b = final_reward(parse_expert_response(render_expert_response(gold)), gold,
                                RewardWeights{}, s);
    EXPECT_DOUBLE_EQ(b.r_acc, 1.0);
    EXPECT_DOUBLE_EQ(b.r_bert, 1.0);
    EXPECT_DOUBLE_EQ(b.r_miou, 2.0);
    EXPECT_EQ(b.r_format, 1.0);
    EXPECT_DOUBLE_EQ(b.final, 17.0);
  }
}

TEST(FinalReward, UnparseableIsZeroAndWeightedSumExact) {
  std::mt19937_64 rng(4);
  TokenF1Scorer s;
  const auto gold = gen::response(rng, Language::Chinese, 3, 2);
  const auto empty = final_reward(parse_expert_response(""), gold, RewardWeights{}, s);
  EXPECT_EQ(empty.final, 0.0);

  RewardBreakdown c;
  c.r_acc = 1;
  c.r_bert = 0.5;
  c.r_miou = 1;
  c.r_format = 1;
  EXPECT_EQ(weighted_sum(c, RewardWeights{}), 14.0);
}

TEST(FinalReward, ScoreOnlyResponse) {
  std::mt19937_64 rng(5);
  TokenF1Scorer s;
  const auto gold = gen::response(rng, Language::Chinese, 4, 2);
  const auto b = final_reward(parse_expert_response("最终分数: 4"), gold, RewardWeights{}, s);
  EXPECT_EQ(b.r_acc, 1.0);
  EXPECT_EQ(b.r_format, 0.0);
  EXPECT_EQ(b.r_miou, 0.0);
  // Only the score part is present: 1 of 6 parts.
  EXPECT_DOUBLE_EQ(b.r_bert, 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(b.final, 10.0 + 2.0 / 6.0);
}

TEST(FinalReward, WeightScalingAndMonotonicity) {
  std::mt19937_64 rng(6);
  TokenF1Scorer s;
  const auto gold = gen::response(rng, Language::Chinese, 2, 3);
  std::vector<ParseReport> group;
  for (int i = 0; i < 8; ++i) {
    auto cand = gen::response(rng, Language::Chinese, static_cast<int>(rng() % 6), static_cast<int>(rng() % 4));
    group.push_back(parse_expert_response(render_expert_response(cand)));
  }
  const RewardWeights w;
  const double c = 3.5;
  const RewardWeights wc{w.w_acc * c, w.w_bert * c, w.w_miou * c, w.w_format * c};
  std::size_t best = 0, best_c = 0;
  std::vector<double> f, fc;
  for (const auto& r : group) {
    f.push_back(final_reward(r, gold, w, s).final);
    fc.push_back(final_reward(r, gold, wc, s).final);
    EXPECT_NEAR(fc.back(), c * f.back(), 1e-12);
  }
  for (std::size_t i = 1; i < f.size(); ++i) {
    if (f[i] > f[best]) best = i;
    if (fc[i] > fc[best_c]) best_c = i;
  }
  EXPECT_EQ(best, best_c);

  RewardBreakdown lo{0.2, 0.3, 0.4, 0, 0, {}};
  const double base = weighted_sum(lo, w);
  for (double RewardBreakdown::*m : {&RewardBreakdown::r_acc, &RewardBreakdown::r_bert,
                                     &RewardBreakdown::r_miou, &RewardBreakdown::r_format}) {
    RewardBreakdown hi = lo;
    hi.*m += 0.1;
    EXPECT_GT(weighted_sum(hi, w), base);
  }
}
