#pragma once

// Evaluation metrics: score regression/classification, theme accuracy, RoI
// detection quality, rank correlation, and the combined report.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inkeval/core.hpp"
#include "inkeval/parser.hpp"
#include "inkeval/serialization.hpp"
#include "inkeval/similarity.hpp"

namespace inkeval {

struct ScoreMetricsReport {
  double mae = 0.0;
  double rmse = 0.0;
  double accuracy = 0.0;
  std::size_t n = 0;
};

/// Throws LengthMismatch or EmptyInput.
ScoreMetricsReport score_metrics(std::span<const Score> preds, std::span<const Score> gts);

/// Fraction of equal major themes. Throws LengthMismatch or EmptyInput.
double theme_accuracy(std::span<const Theme> preds, std::span<const Theme> gts);

struct DetectionReport {
  double miou = 0.0;
  double roi_similarity = 0.0;
  double avg_pred_count = 0.0;
  double avg_gt_count = 0.0;
  std::size_t pairs = 0;
};

/// Per-image argmax matching; means are pooled over all matched pairs.
/// Predictions on an image without gt regions count as zero-valued pairs.
DetectionReport detection_metrics(std::span<const std::vector<RoiRegion>> pred_sets,
                                  std::span<const std::vector<RoiRegion>> gt_sets,
                                  SimilarityScorer& scorer);

enum class KendallVariant { TauA, TauB };

struct RankCorrelationReport {
  double kendall_tau = 0.0;  // NaN when undefined (a constant ranking under tau-b)
  double spearman_rho = 0.0;
  double top1_accuracy = 0.0;
  double pairwise_accuracy = 0.0;
  KendallVariant variant = KendallVariant::TauA;
  std::size_t n = 0;
};

/// Inputs are rankings of the same n >= 2 items (1 = best). Tie-free inputs
/// (permutations of 1..n) use tau-a; fractional rankings with averaged ties use
/// tau-b. Throws SizeMismatch or NotAPermutation.
RankCorrelationReport rank_correlations(std::span<const double> rank_a,
                                        std::span<const double> rank_b);

/// Descending-score ranking, ties broken by ascending index. Result[i] is the
/// 1-based rank of item i. Throws EmptyInput.
std::vector<double> scores_to_ranking(std::span<const double> scores);

/// Descending-score fractional ranking; tied items share their average rank.
std::vector<double> average_ranking(std::span<const double> scores);

struct RankGroup {
  std::string id;
  std::vector<double> rank_a;
  std::vector<double> rank_b;
};

struct AggregateRankReport {
  double kendall_tau = 0.0;
  double spearman_rho = 0.0;
  double top1_accuracy = 0.0;
  double pairwise_accuracy = 0.0;
  std::size_t groups = 0;
  std::vector<RankCorrelationReport> per_group;
};

/// Means over groups; top-1 accuracy is the fraction of groups whose first
/// item agrees.
AggregateRankReport aggregate_rank_correlations(std::span<const RankGroup> groups);

/// Full report over a prediction set. Optional fields are null when the
/// metric is undefined for the input.
struct MetricReport {
  std::size_t n = 0;
  std::size_t parse_failures = 0;  // predictions without a parseable score
  std::optional<double> mae, rmse, accuracy;
  std::optional<double> bertscore_parts, bertscore_full;
  std::optional<double> miou, roi_bertscore;
  std::optional<double> theme_acc;
  std::optional<double> kendall_tau, spearman_rho, top1_acc, pairwise_acc;
  std::optional<KendallVariant> kendall_variant;
  std::optional<double> avg_pred_rois, avg_gt_rois;
  std::string similarity_backend;
};

/// preds[i] is the parsed prediction for gts[i]. MAE/RMSE cover predictions
/// with a parsed score; accuracy and theme_acc count unparsed items as wrong.
MetricReport evaluate_predictions(std::span<const ParseReport> preds,
                                  std::span<const ExpertResponse> gts, SimilarityScorer& scorer,
                                  int jobs = 1);

Json to_json(const MetricReport& report);
/// One "key=value" line per metric in the JSON key order.
std::string to_key_value(const MetricReport& report);

Json to_json(const RankCorrelationReport& report);
Json to_json(const AggregateRankReport& report);

std::string_view to_string(KendallVariant v);

}  // namespace inkeval
