#include "inkeval/grpo.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "inkeval/error.hpp"
#include "inkeval/parallel.hpp"
#include "inkeval/parser.hpp"

namespace inkeval {

std::vector<double> group_advantages(std::span<const double> rewards, double std_floor) {
  const std::size_t g = rewards.size();
  if (g < 2) {
    throw Error(ErrorKind::GroupTooSmall,
                "advantages need at least 2 samples, got " + std::to_string(g));
  }
  double sum = 0.0;
  for (double r : rewards) sum += r;
  const double mean = sum / static_cast<double>(g);
  double sq = 0.0;
  for (double r : rewards) sq += (r - mean) * (r - mean);
  const double stddev = std::sqrt(sq / static_cast<double>(g));

  std::vector<double> out(g, 0.0);
  const double denom = std::max(stddev, std_floor);
  if (stddev == 0.0 || denom == 0.0) return out;
  for (std::size_t i = 0; i < g; ++i) out[i] = (rewards[i] - mean) / denom;
  return out;
}

double importance_ratio(const GroupSample& s, double max_ratio) {
  if (!std::isfinite(s.logp_new) || !std::isfinite(s.logp_old) || s.logp_new > 0.0 ||
      s.logp_old > 0.0) {
    throw Error(ErrorKind::InvalidValue, "log-probabilities must be finite and <= 0");
  }
  const double log_ratio = s.logp_new - s.logp_old;
  if (log_ratio > std::log(max_ratio)) {
    spdlog::warn("importance ratio exp({}) capped at {}", log_ratio, max_ratio);
    return max_ratio;
  }
  return std::exp(log_ratio);
}

double clipped_term(double ratio, double advantage, double clip_epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

double clipped_surrogate(std::span<const GroupSample> samples, const GrpoConfig& config) {
  if (samples.size() < 2) {
    throw Error(ErrorKind::GroupTooSmall,
                "objective needs at least 2 samples, got " + std::to_string(samples.size()));
  }
  std::vector<double> rewards;
  rewards.reserve(samples.size());
  for (const auto& s : samples) rewards.push_back(s.reward);
  const auto adv = group_advantages(rewards, config.std_floor);
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    sum += clipped_term(importance_ratio(samples[i], config.max_ratio), adv[i],
                        config.clip_epsilon);
  }
  return sum / static_cast<double>(samples.size());
}

std::vector<RewardBreakdown> score_group(std::span<const std::string> responses,
                                         const ExpertResponse& gt, const RewardWeights& weights,
                                         SimilarityScorer& scorer, int width, int height,
                                         int jobs) {
  if (responses.size() < 2) {
    throw Error(ErrorKind::GroupTooSmall,
                "a group needs at least 2 responses, got " + std::to_string(responses.size()));
  }
  std::vector<RewardBreakdown> out(responses.size());
  parallel_for(responses.size(), jobs, [&](std::size_t i) {
    try {
      out[i] = final_reward(parse_expert_response(responses[i], width, height), gt, weights, scorer);
    } catch (const std::exception& e) {
      spdlog::warn("score_group: sample {} scored as zero: {}", i, e.what());
      out[i] = RewardBreakdown{};
    }
  });
  return out;
}

}  // namespace inkeval
