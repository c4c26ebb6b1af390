#include "inkeval/reward.hpp"

#include <algorithm>
#include <cstdlib>

#include "inkeval/error.hpp"
#include "inkeval/text.hpp"

namespace inkeval {

double accuracy_reward(Score pred, Score gt) {
  return 1.0 - std::abs(pred.value() - gt.value()) / 5.0;
}

double bert_reward(std::span<const std::string> pred_parts,
                   std::span<const std::string> gt_parts, SimilarityScorer& scorer) {
  if (pred_parts.size() != gt_parts.size() || pred_parts.empty()) {
    throw Error(ErrorKind::LengthMismatch,
                "bert_reward needs equal non-zero part counts (" +
                    std::to_string(pred_parts.size()) + " vs " + std::to_string(gt_parts.size()) +
                    ")");
  }
  std::vector<TextPair> pairs;
  for (std::size_t i = 0; i < pred_parts.size(); ++i) {
    if (text::trim(pred_parts[i]).empty()) continue;
    pairs.push_back({pred_parts[i], gt_parts[i]});
  }
  const auto sims = scorer.batch_similarity(pairs);
  double sum = 0.0;
  for (double s : sims) sum += s;
  return sum / static_cast<double>(pred_parts.size());
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const double h = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (w <= 0.0 || h <= 0.0) return 0.0;
  const double inter = w * h;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<std::pair<std::size_t, std::size_t>> match_boxes(std::span<const RoiRegion> pred,
                                                             std::span<const RoiRegion> gt) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (pred.empty()) return out;
  if (gt.empty()) throw Error(ErrorKind::EmptyGt, "no ground-truth regions to match against");
  out.reserve(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    std::size_t best = 0;
    double best_iou = iou(pred[i].box, gt[0].box);
    for (std::size_t j = 1; j < gt.size(); ++j) {
      const double v = iou(pred[i].box, gt[j].box);
      if (v > best_iou) {
        best_iou = v;
        best = j;
      }
    }
    out.emplace_back(i, best);
  }
  return out;
}

MiouResult miou_reward(std::span<const RoiRegion> pred, std::span<const RoiRegion> gt,
                       SimilarityScorer& scorer) {
  MiouResult out;
  if (pred.empty() || gt.empty()) return out;
  const auto pairs = match_boxes(pred, gt);
  std::vector<TextPair> texts;
  texts.reserve(pairs.size());
  for (const auto& [i, j] : pairs) texts.push_back({pred[i].description, gt[j].description});
  const auto sims = scorer.batch_similarity(texts);
  double sum = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    const double v = iou(pred[i].box, gt[j].box);
    out.matching.push_back(BoxMatch{i, j, v, sims[k]});
    sum += v + sims[k];
  }
  out.value = sum / static_cast<double>(pred.size());
  return out;
}

double format_reward(const ParseReport& report) { return report.complete ? 1.0 : 0.0; }

double weighted_sum(const RewardBreakdown& c, const RewardWeights& w) {
  return w.w_acc * c.r_acc + w.w_bert * c.r_bert + w.w_miou * c.r_miou + w.w_format * c.r_format;
}

RewardBreakdown final_reward(const ParseReport& pred, const ExpertResponse& gt,
                             const RewardWeights& weights, SimilarityScorer& scorer) {
  RewardBreakdown out;
  out.r_acc = pred.score ? accuracy_reward(*pred.score, gt.final_score) : 0.0;
  const PartTexts gt_parts = reward_parts(gt);
  out.r_bert = bert_reward(pred.parts, gt_parts, scorer);
  if (pred.rois) {
    auto miou = miou_reward(*pred.rois, gt.rois, scorer);
    out.r_miou = miou.value;
    out.matching = std::move(miou.matching);
  }
  out.r_format = format_reward(pred);
  out.final = weighted_sum(out, weights);
  return out;
}

Json to_json(const RewardBreakdown& b) {
  Json j;
  j["r_acc"] = b.r_acc;
  j["r_bert"] = b.r_bert;
  j["r_miou"] = b.r_miou;
  j["r_format"] = b.r_format;
  j["final"] = b.final;
  Json m = Json::array();
  for (const auto& x : b.matching) {
    m.push_back(Json{{"pred_index", x.pred_index},
                     {"gt_index", x.gt_index},
                     {"iou", x.iou},
                     {"desc_sim", x.desc_sim}});
  }
  j["matching"] = std::move(m);
  return j;
}

}  // namespace inkeval
