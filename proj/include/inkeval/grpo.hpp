#pragma once

// Group-relative advantages and the clipped surrogate objective, evaluated
// over sequence-level log-probabilities supplied by a training framework.
// Nothing here updates parameters.

#include <span>
#include <string>
#include <vector>

#include "inkeval/core.hpp"
#include "inkeval/reward.hpp"
#include "inkeval/similarity.hpp"

namespace inkeval {

struct GroupSample {
  std::string response_text;
  double reward = 0.0;
  double logp_new = 0.0;  // sum of token log-probs under the current policy
  double logp_old = 0.0;  // ... and under the sampling policy
};

/// (r_i - mean) / max(std, std_floor) with the population std. A group with
/// zero spread yields all zeros. Throws GroupTooSmall for fewer than 2 rewards.
std::vector<double> group_advantages(std::span<const double> rewards, double std_floor = 1e-8);

/// exp(logp_new - logp_old), capped at max_ratio (logged when capped).
/// Throws InvalidValue for non-finite or positive log-probs.
double importance_ratio(const GroupSample& sample, double max_ratio = 1e4);

/// min(ratio * A, clip(ratio, 1-eps, 1+eps) * A) for one sample.
double clipped_term(double ratio, double advantage, double clip_epsilon);

/// (1/G) sum_i clipped_term(ratio_i, A_i, eps), advantages from the samples'
/// rewards. Throws GroupTooSmall.
double clipped_surrogate(std::span<const GroupSample> samples, const GrpoConfig& config);

/// Parses each response and computes its reward breakdown, preserving order.
/// Per-sample failures become zero breakdowns. Throws GroupTooSmall.
std::vector<RewardBreakdown> score_group(std::span<const std::string> responses,
                                         const ExpertResponse& gt, const RewardWeights& weights,
                                         SimilarityScorer& scorer, int width = 0, int height = 0,
                                         int jobs = 1);

}  // namespace inkeval
