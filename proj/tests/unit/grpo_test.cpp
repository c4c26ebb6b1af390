#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "inkeval/error.hpp"
#include "inkeval/grpo.hpp"
#include "inkeval/parser.hpp"
#include "oracles.hpp"

using namespace inkeval;

namespace {

std::vector<GroupSample> samples(const std::vector<double>& rewards,
                                 const std::vector<double>& ratios) {
  std::vector<GroupSample> out;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    out.push_back({"", rewards[i], std::log(ratios[i]) - 10.0, -10.0});
  }
  return out;
}

double surrogate(const std::vector<double>& rewards, const std::vector<double>& ratios, double eps) {
  GrpoConfig c;
  c.clip_epsilon = eps;
  return clipped_surrogate(samples(rewards, ratios), c);
}

}  // namespace

TEST(GroupAdvantages, Examples) {
  EXPECT_EQ(group_advantages(std::vector<double>{2, 2, 2}), (std::vector<double>{0, 0, 0}));
  const auto a = group_advantages(std::vector<double>{0, 1});
  EXPECT_DOUBLE_EQ(a[0], -1.0);
  EXPECT_DOUBLE_EQ(a[1], 1.0);
  const auto b = group_advantages(std::vector<double>{1, 2, 3});
  EXPECT_NEAR(b[0], -1.2247, 1e-4);
  EXPECT_NEAR(b[1], 0.0, 1e-12);
  EXPECT_NEAR(b[2], 1.2247, 1e-4);
  EXPECT_EQ(group_advantages(std::vector<double>{5, 5}, 0.0), (std::vector<double>{0, 0}));
  EXPECT_THROW(group_advantages(std::vector<double>{1}), Error);
}

TEST(GroupAdvantages, NormalizedAndShiftInvariant) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 5);
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> r(2 + rng() % 15);
    for (double& x : r) x = n(rng);
    const auto a = group_advantages(r);
    double mean = 0, var = 0;
    for (double x : a) mean += x;
    mean /= a.size();
    for (double x : a) var += (x - mean) * (x - mean);
    EXPECT_LT(std::abs(mean), 1e-9);
    EXPECT_NEAR(std::sqrt(var / a.size()), 1.0, 1e-9);
    const auto want = oracle::advantages(r);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], want[i], 1e-12);

    std::vector<double> shifted = r;
    for (double& x : shifted) x += 3.25;
    const auto b = group_advantages(shifted);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
  }
}

TEST(ImportanceRatio, Examples) {
  EXPECT_EQ(importance_ratio({"", 0, -3.0, -3.0}), 1.0);
  EXPECT_DOUBLE_EQ(importance_ratio({"", 0, -3.0 + std::log(2.0), -3.0}), 2.0);
  EXPECT_DOUBLE_EQ(importance_ratio({"", 0, -3.0 - std::log(4.0), -3.0}), 0.25);
  EXPECT_EQ(importance_ratio({"", 0, -1.0, -500.0}), 1e4);
  EXPECT_EQ(importance_ratio({"", 0, -1.0, -500.0}, 50.0), 50.0);
  EXPECT_THROW(importance_ratio({"", 0, 0.5, -1.0}), Error);
  EXPECT_THROW(importance_ratio({"", 0, std::nan(""), -1.0}), Error);
}

TEST(ClippedSurrogate, WorkedCases) {
  EXPECT_NEAR(surrogate({0, 1}, {1, 1}, 0.2), 0.0, 1e-12);
  EXPECT_NEAR(surrogate({0, 1}, {1, 2}, 0.2), 0.1, 1e-12);
  EXPECT_NEAR(surrogate({3, 1, 4, 1}, {1, 1, 1, 1}, 0.2), 0.0, 1e-12);
  EXPECT_THROW(surrogate({1}, {1}, 0.2), Error);
}

TEST(ClippedSurrogate, TermBounds) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 3), a(-2, 2);
  for (int i = 0; i < 5000; ++i) {
    const double rho = u(rng), adv = a(rng), eps = 0.05 + 0.5 * u(rng) / 3;
    const double t = clipped_term(rho, adv, eps);
    const double clipped = std::clamp(rho, 1 - eps, 1 + eps);
    if (adv >= 0) EXPECT_LE(t, rho * adv + 1e-15);
    if (adv <= 0) EXPECT_LE(t, clipped * adv + 1e-15);
  }
}

TEST(ClippedSurrogate, MatchesOracleAndWiderClipNeverLower) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> rew(0, 17), rat(0.05, 3.0), ep(0.01, 0.9);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t g = 2 + rng() % 10;
    std::vector<double> r(g), rho(g);
    for (auto& x : r) x = rew(rng);
    for (auto& x : rho) x = rat(rng);
    const double eps = ep(rng);
    const double got = surrogate(r, rho, eps);
    EXPECT_NEAR(got, oracle::surrogate(r, rho, eps), 1e-10);
    const double wider = std::min(0.99, eps + 0.05);
    EXPECT_GE(surrogate(r, rho, wider), got - 1e-12);
  }
}

TEST(ScoreGroup, OrderPreservingAndFailuresAreZero) {
  std::mt19937_64 rng(4);
  const auto gold = gen::response(rng, Language::Chinese, 4, 2);
  const std::string text = render_expert_response(gold);
  TokenF1Scorer s;
  const std::vector<std::string> group = {text, "", text};
  const auto out = score_group(group, gold, RewardWeights{}, s);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_DOUBLE_EQ(out[0].final, 17.0);
  EXPECT_EQ(out[1].final, 0.0);
  EXPECT_DOUBLE_EQ(out[2].final, 17.0);

  std::vector<std::string> perm;
  for (int i = 0; i < 6; ++i) {
    perm.push_back(render_expert_response(
        gen::response(rng, Language::Chinese, i % 6, static_cast<int>(rng() % 4))));
  }
  const auto base = score_group(perm, gold, RewardWeights{}, s);
  std::vector<std::string> rev(perm.rbegin(), perm.rend());
  const auto reversed = score_group(rev, gold, RewardWeights{}, s, 0, 0, 4);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    EXPECT_EQ(base[i].final, reversed[perm.size() - 1 - i].final);
  }
  EXPECT_THROW(score_group(std::vector<std::string>{text}, gold, RewardWeights{}, s), Error);
}
