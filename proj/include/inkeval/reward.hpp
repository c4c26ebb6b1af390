#pragma once

// Expert reward: accuracy, part-wise similarity, box matching with
// description similarity, format, and their weighted sum.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "inkeval/core.hpp"
#include "inkeval/parser.hpp"
#include "inkeval/serialization.hpp"
#include "inkeval/similarity.hpp"

namespace inkeval {

struct BoxMatch {
  std::size_t pred_index = 0;
  std::size_t gt_index = 0;
  double iou = 0.0;
  double desc_sim = 0.0;

  bool operator==(const BoxMatch&) const = default;
};

struct RewardBreakdown {
  double r_acc = 0.0;
  double r_bert = 0.0;
  double r_miou = 0.0;
  double r_format = 0.0;
  double final = 0.0;
  std::vector<BoxMatch> matching;
};

/// 1 - |pred - gt| / 5.
double accuracy_reward(Score pred, Score gt);

/// Mean per-part similarity. Empty prediction parts score 0.
/// Throws LengthMismatch when the part counts differ or are zero.
double bert_reward(std::span<const std::string> pred_parts,
                   std::span<const std::string> gt_parts, SimilarityScorer& scorer);

double iou(const BoundingBox& a, const BoundingBox& b);

/// For each prediction, the gt index with maximal IoU (lowest index on ties).
/// Many predictions may share one gt. Throws EmptyGt when gt is empty and
/// pred is not.
std::vector<std::pair<std::size_t, std::size_t>> match_boxes(std::span<const RoiRegion> pred,
                                                             std::span<const RoiRegion> gt);

struct MiouResult {
  double value = 0.0;
  std::vector<BoxMatch> matching;
};

/// Mean over predictions of IoU + description similarity against the matched
/// gt region. 0 for an empty prediction list or an empty gt list.
MiouResult miou_reward(std::span<const RoiRegion> pred, std::span<const RoiRegion> gt,
                       SimilarityScorer& scorer);

double format_reward(const ParseReport& report);

/// Weighted sum with every component computed from the report. A missing
/// score gives r_acc = 0; missing RoIs give r_miou = 0.
RewardBreakdown final_reward(const ParseReport& pred, const ExpertResponse& gt,
                             const RewardWeights& weights, SimilarityScorer& scorer);

/// w_acc*r_acc + w_bert*r_bert + w_miou*r_miou + w_format*r_format.
double weighted_sum(const RewardBreakdown& components, const RewardWeights& weights);

Json to_json(const RewardBreakdown& breakdown);

}  // namespace inkeval
