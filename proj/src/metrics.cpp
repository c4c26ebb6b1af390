#include "inkeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>

#include "inkeval/error.hpp"
#include "inkeval/parallel.hpp"
#include "inkeval/reward.hpp"
#include "inkeval/text.hpp"

namespace inkeval {
namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorKind::LengthMismatch, std::string(what) + ": lengths differ (" +
                                               std::to_string(a) + " vs " + std::to_string(b) +
                                               ")");
  }
  if (a == 0) throw Error(ErrorKind::EmptyInput, std::string(what) + ": empty input");
}

// Ascending fractional ranking of values: tied values share their mean rank.
std::vector<double> fractional_ascending(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) out[idx[k]] = r;
    i = j + 1;
  }
  return out;
}

bool has_ties(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) != s.end();
}

void check_ranking(std::span<const double> r, const char* name) {
  for (double x : r) {
    if (!std::isfinite(x)) {
      throw Error(ErrorKind::NotAPermutation, std::string(name) + " holds a non-finite rank");
    }
  }
  const auto expect = fractional_ascending(r);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (std::abs(expect[i] - r[i]) > 1e-9) {
      throw Error(ErrorKind::NotAPermutation,
                  std::string(name) + " is not a ranking of 1.." + std::to_string(r.size()));
    }
  }
}

std::int64_t tie_pairs(std::span<const std::size_t> order, std::span<const double> key) {
  std::int64_t total = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && key[order[j + 1]] == key[order[i]]) ++j;
    const auto t = static_cast<std::int64_t>(j - i + 1);
    total += t * (t - 1) / 2;
    i = j + 1;
  }
  return total;
}

// Counts pairs i < j with v[i] > v[j] while merge-sorting v.
std::int64_t count_inversions(std::vector<double>& v) {
  std::vector<double> buf(v.size());
  std::int64_t swaps = 0;
  for (std::size_t width = 1; width < v.size(); width *= 2) {
    for (std::size_t lo = 0; lo < v.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, v.size());
      const std::size_t hi = std::min(lo + 2 * width, v.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          swaps += static_cast<std::int64_t>(mid - i);
          buf[k++] = v[j++];
        } else {
          buf[k++] = v[i++];
        }
      }
      while (i < mid) buf[k++] = v[i++];
      while (j < hi) buf[k++] = v[j++];
    }
    std::swap(v, buf);
  }
  return swaps;
}

std::size_t first_ranked(std::span<const double> r) {
  return static_cast<std::size_t>(std::min_element(r.begin(), r.end()) - r.begin());
}

}  // namespace

ScoreMetricsReport score_metrics(std::span<const Score> preds, std::span<const Score> gts) {
  check_lengths(preds.size(), gts.size(), "score_metrics");
  ScoreMetricsReport out;
  out.n = preds.size();
  double abs_sum = 0.0, sq_sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i].value() - gts[i].value();
    abs_sum += std::abs(d);
    sq_sum += d * d;
    if (d == 0) ++hits;
  }
  const auto n = static_cast<double>(out.n);
  out.mae = abs_sum / n;
  out.rmse = std::sqrt(sq_sum / n);
  out.accuracy = static_cast<double>(hits) / n;
  return out;
}

double theme_accuracy(std::span<const Theme> preds, std::span<const Theme> gts) {
  check_lengths(preds.size(), gts.size(), "theme_accuracy");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i].major() == gts[i].major();
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

DetectionReport detection_metrics(std::span<const std::vector<RoiRegion>> pred_sets,
                                  std::span<const std::vector<RoiRegion>> gt_sets,
                                  SimilarityScorer& scorer) {
  if (pred_sets.size() != gt_sets.size()) {
    throw Error(ErrorKind::LengthMismatch, "detection_metrics: image counts differ");
  }
  DetectionReport out;
  if (pred_sets.empty()) return out;
  double iou_sum = 0.0, sim_sum = 0.0;
  std::size_t pred_total = 0, gt_total = 0;
  for (std::size_t k = 0; k < pred_sets.size(); ++k) {
    const auto& pred = pred_sets[k];
    const auto& gt = gt_sets[k];
    pred_total += pred.size();
    gt_total += gt.size();
    if (pred.empty()) continue;
    if (gt.empty()) {
      out.pairs += pred.size();
      continue;
    }
    const auto matches = match_boxes(pred, gt);
    std::vector<TextPair> texts;
    for (const auto& [i, j] : matches) texts.push_back({pred[i].description, gt[j].description});
    const auto sims = scorer.batch_similarity(texts);
    for (std::size_t m = 0; m < matches.size(); ++m) {
      iou_sum += iou(pred[matches[m].first].box, gt[matches[m].second].box);
      sim_sum += sims[m];
    }
    out.pairs += matches.size();
  }
  const auto images = static_cast<double>(pred_sets.size());
  if (out.pairs > 0) {
    out.miou = iou_sum / static_cast<double>(out.pairs);
    out.roi_similarity = sim_sum / static_cast<double>(out.pairs);
  }
  out.avg_pred_count = static_cast<double>(pred_total) / images;
  out.avg_gt_count = static_cast<double>(gt_total) / images;
  return out;
}

RankCorrelationReport rank_correlations(std::span<const double> rank_a,
                                        std::span<const double> rank_b) {
  if (rank_a.size() != rank_b.size()) {
    throw Error(ErrorKind::SizeMismatch, "rankings differ in size (" +
                                             std::to_string(rank_a.size()) + " vs " +
                                             std::to_string(rank_b.size()) + ")");
  }
  if (rank_a.size() < 2) {
    throw Error(ErrorKind::NotAPermutation, "rankings need at least 2 items");
  }
  check_ranking(rank_a, "rank_a");
  check_ranking(rank_b, "rank_b");

  const std::size_t n = rank_a.size();
  RankCorrelationReport out;
  out.n = n;
  const bool tied = has_ties(rank_a) || has_ties(rank_b);
  out.variant = tied ? KendallVariant::TauB : KendallVariant::TauA;

  // Sort by (a, b); discordant pairs are then the strict inversions of b.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) {
    return rank_a[x] != rank_a[y] ? rank_a[x] < rank_a[y] : rank_b[x] < rank_b[y];
  });
  const std::int64_t n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t ties_a = tie_pairs(order, rank_a);
  std::int64_t ties_ab = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && rank_a[order[j + 1]] == rank_a[order[i]] &&
           rank_b[order[j + 1]] == rank_b[order[i]]) {
      ++j;
    }
    const auto t = static_cast<std::int64_t>(j - i + 1);
    ties_ab += t * (t - 1) / 2;
    i = j + 1;
  }
  std::vector<double> b_seq(n);
  for (std::size_t i = 0; i < n; ++i) b_seq[i] = rank_b[order[i]];
  const std::int64_t discordant = count_inversions(b_seq);
  std::vector<std::size_t> sorted_b(n);
  std::iota(sorted_b.begin(), sorted_b.end(), 0);
  std::sort(sorted_b.begin(), sorted_b.end(), [&](auto x, auto y) { return rank_b[x] < rank_b[y]; });
  const std::int64_t ties_b = tie_pairs(sorted_b, rank_b);
  const std::int64_t concordant = n0 - ties_a - ties_b + ties_ab - discordant;

  const double diff = static_cast<double>(concordant - discordant);
  if (tied) {
    const double denom =
        std::sqrt(static_cast<double>(n0 - ties_a) * static_cast<double>(n0 - ties_b));
    out.kendall_tau = denom > 0.0 ? diff / denom : std::numeric_limits<double>::quiet_NaN();
  } else {
    out.kendall_tau = diff / static_cast<double>(n0);
  }
  out.pairwise_accuracy = static_cast<double>(concordant) / static_cast<double>(n0);

  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) d2 += (rank_a[i] - rank_b[i]) * (rank_a[i] - rank_b[i]);
  const auto nd = static_cast<double>(n);
  out.spearman_rho = 1.0 - 6.0 * d2 / (nd * (nd * nd - 1.0));

  const std::size_t top_a = first_ranked(rank_a);
  const double best_b = *std::min_element(rank_b.begin(), rank_b.end());
  out.top1_accuracy = rank_b[top_a] == best_b ? 1.0 : 0.0;
  return out;
}

std::vector<double> scores_to_ranking(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorKind::EmptyInput, "scores_to_ranking: no scores");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  std::vector<double> out(scores.size());
  for (std::size_t pos = 0; pos < idx.size(); ++pos) out[idx[pos]] = static_cast<double>(pos + 1);
  return out;
}

std::vector<double> average_ranking(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorKind::EmptyInput, "average_ranking: no scores");
  std::vector<double> neg(scores.size());
  std::transform(scores.begin(), scores.end(), neg.begin(), [](double s) { return -s; });
  return fractional_ascending(neg);
}

AggregateRankReport aggregate_rank_correlations(std::span<const RankGroup> groups) {
  if (groups.empty()) throw Error(ErrorKind::EmptyInput, "no ranking groups");
  AggregateRankReport out;
  for (const auto& g : groups) {
    try {
      out.per_group.push_back(rank_correlations(g.rank_a, g.rank_b));
    } catch (const Error& e) {
      throw Error(e.kind(), "group " + g.id + ": " + e.detail());
    }
  }
  std::size_t tau_count = 0;
  for (const auto& r : out.per_group) {
    if (!std::isnan(r.kendall_tau)) {
      out.kendall_tau += r.kendall_tau;
      ++tau_count;
    }
    out.spearman_rho += r.spearman_rho;
    out.top1_accuracy += r.top1_accuracy;
    out.pairwise_accuracy += r.pairwise_accuracy;
  }
  out.groups = groups.size();
  const auto g = static_cast<double>(out.groups);
  out.kendall_tau = tau_count ? out.kendall_tau / static_cast<double>(tau_count)
                              : std::numeric_limits<double>::quiet_NaN();
  out.spearman_rho /= g;
  out.top1_accuracy /= g;
  out.pairwise_accuracy /= g;
  return out;
}

MetricReport evaluate_predictions(std::span<const ParseReport> preds,
                                  std::span<const ExpertResponse> gts, SimilarityScorer& scorer,
                                  int jobs) {
  check_lengths(preds.size(), gts.size(), "evaluate_predictions");
  const std::size_t n = preds.size();
  MetricReport out;
  out.n = n;
  out.similarity_backend = scorer.backend_stamp();

  // Per-item similarity work runs in parallel; every reduction below walks
  // the items in index order.
  std::vector<double> part_scores(n, 0.0), full_scores(n, 0.0);
  parallel_for(n, jobs, [&](std::size_t i) {
    const PartTexts gt_parts = reward_parts(gts[i]);
    part_scores[i] = bert_reward(preds[i].parts, gt_parts, scorer);
    std::string gold = gts[i].raw_text.empty() ? render_expert_response(gts[i]) : gts[i].raw_text;
    std::string pred_text;
    for (const auto& p : preds[i].parts) {
      if (!pred_text.empty() && !p.empty()) pred_text += '\n';
      pred_text += p;
    }
    const std::string ref = text::normalize_whitespace(gold);
    full_scores[i] = pred_text.empty() ? 0.0 : scorer.similarity(pred_text, ref);
  });

  std::vector<Score> ps, gs;
  std::vector<double> pv, gv;
  std::size_t hits = 0, theme_hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (preds[i].score) {
      ps.push_back(*preds[i].score);
      gs.push_back(gts[i].final_score);
      pv.push_back(preds[i].score->value());
      gv.push_back(gts[i].final_score.value());
      hits += *preds[i].score == gts[i].final_score;
    } else {
      ++out.parse_failures;
    }
    if (preds[i].theme && preds[i].theme->major() == gts[i].theme.major()) ++theme_hits;
  }
  const auto nd = static_cast<double>(n);
  if (!ps.empty()) {
    const auto sm = score_metrics(ps, gs);
    out.mae = sm.mae;
    out.rmse = sm.rmse;
  }
  out.accuracy = static_cast<double>(hits) / nd;
  out.theme_acc = static_cast<double>(theme_hits) / nd;
  out.bertscore_parts = std::accumulate(part_scores.begin(), part_scores.end(), 0.0) / nd;
  out.bertscore_full = std::accumulate(full_scores.begin(), full_scores.end(), 0.0) / nd;

  std::vector<std::vector<RoiRegion>> pred_rois(n), gt_rois(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (preds[i].rois) pred_rois[i] = *preds[i].rois;
    gt_rois[i] = gts[i].rois;
  }
  const auto det = detection_metrics(pred_rois, gt_rois, scorer);
  if (det.pairs > 0) {
    out.miou = det.miou;
    out.roi_bertscore = det.roi_similarity;
  }
  out.avg_pred_rois = det.avg_pred_count;
  out.avg_gt_rois = det.avg_gt_count;

  if (pv.size() >= 2) {
    const auto rc = rank_correlations(average_ranking(pv), average_ranking(gv));
    if (!std::isnan(rc.kendall_tau)) out.kendall_tau = rc.kendall_tau;
    out.spearman_rho = rc.spearman_rho;
    out.top1_acc = rc.top1_accuracy;
    out.pairwise_acc = rc.pairwise_accuracy;
    out.kendall_variant = rc.variant;
  }
  return out;
}

std::string_view to_string(KendallVariant v) { return v == KendallVariant::TauA ? "tau-a" : "tau-b"; }

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
Json num(double v) { return std::isnan(v) ? Json(nullptr) : Json(v); }

}  // namespace

Json to_json(const MetricReport& r) {
  Json j;
  j["n"] = r.n;
  j["mae"] = opt(r.mae);
  j["rmse"] = opt(r.rmse);
  j["accuracy"] = opt(r.accuracy);
  j["bertscore"] = opt(r.bertscore_parts);
  j["bertscore_parts"] = opt(r.bertscore_parts);
  j["bertscore_full"] = opt(r.bertscore_full);
  j["miou"] = opt(r.miou);
  j["roi_bertscore"] = opt(r.roi_bertscore);
  j["theme_acc"] = opt(r.theme_acc);
  j["kendall_tau"] = opt(r.kendall_tau);
  j["spearman_rho"] = opt(r.spearman_rho);
  j["top1_acc"] = opt(r.top1_acc);
  j["pairwise_acc"] = opt(r.pairwise_acc);
  j["kendall_variant"] =
      r.kendall_variant ? Json(std::string(to_string(*r.kendall_variant))) : Json(nullptr);
  j["avg_pred_rois"] = opt(r.avg_pred_rois);
  j["avg_gt_rois"] = opt(r.avg_gt_rois);
  j["parse_failures"] = r.parse_failures;
  j["similarity_backend"] = r.similarity_backend;
  return j;
}

std::string to_key_value(const MetricReport& report) {
  std::ostringstream os;
  const Json j = to_json(report);
  for (const auto& [key, value] : j.items()) {
    os << key << '=' << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
  }
  return os.str();
}

Json to_json(const RankCorrelationReport& r) {
  return Json{{"n", r.n},
              {"kendall_tau", num(r.kendall_tau)},
              {"spearman_rho", r.spearman_rho},
              {"top1_acc", r.top1_accuracy},
              {"pairwise_acc", r.pairwise_accuracy},
              {"kendall_variant", std::string(to_string(r.variant))}};
}

Json to_json(const AggregateRankReport& r) {
  Json j{{"groups", r.groups},
         {"kendall_tau", num(r.kendall_tau)},
         {"spearman_rho", r.spearman_rho},
         {"top1_acc", r.top1_accuracy},
         {"pairwise_acc", r.pairwise_accuracy}};
  Json per = Json::array();
  for (const auto& g : r.per_group) per.push_back(to_json(g));
  j["per_group"] = std::move(per);
  return j;
}

}  // namespace inkeval
