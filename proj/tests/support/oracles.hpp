#pragma once

// Reference implementations written straight from the formulas, without
// sharing code with the library. Slow on purpose.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct Box {
  double x0, y0, x1, y1;
};

inline double accuracy(int pred, int gt) { return 1.0 - std::abs(pred - gt) / 5.0; }

inline double iou(const Box& a, const Box& b) {
  const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  if (w <= 0 || h <= 0) return 0.0;
  const double inter = w * h;
  const double uni = (a.x1 - a.x0) * (a.y1 - a.y0) + (b.x1 - b.x0) * (b.y1 - b.y0) - inter;
  return inter / uni;
}

// All-pairs table, then the first maximum per prediction.
inline std::vector<std::pair<std::size_t, std::size_t>> match(const std::vector<Box>& pred,
                                                               const std::vector<Box>& gt) {
  std::vector<std::vector<double>> table(pred.size(), std::vector<double>(gt.size()));
  for (std::size_t i = 0; i < pred.size(); ++i)
    for (std::size_t j = 0; j < gt.size(); ++j) table[i][j] = iou(pred[i], gt[j]);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < gt.size(); ++j)
      if (table[i][j] > table[i][best]) best = j;
    out.emplace_back(i, best);
  }
  return out;
}

inline std::vector<double> advantages(const std::vector<double>& r, double floor = 1e-8) {
  const double n = static_cast<double>(r.size());
  double mean = 0;
  for (double x : r) mean += x;
  mean /= n;
  double var = 0;
  for (double x : r) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out;
  for (double x : r) out.push_back(sd == 0 ? 0.0 : (x - mean) / std::max(sd, floor));
  return out;
}

inline double surrogate(const std::vector<double>& rewards, const std::vector<double>& ratios,
                        double eps) {
  const auto a = advantages(rewards);
  double total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double clipped = ratios[i];
    if (clipped < 1 - eps) clipped = 1 - eps;
    if (clipped > 1 + eps) clipped = 1 + eps;
    const double unclipped_term = ratios[i] * a[i];
    const double clipped_term = clipped * a[i];
    total += unclipped_term < clipped_term ? unclipped_term : clipped_term;
  }
  return total / static_cast<double>(a.size());
}

struct Scores {
  double mae, rmse, accuracy;
};

inline Scores score_metrics(const std::vector<int>& p, const std::vector<int>& g) {
  double abs_sum = 0, sq_sum = 0, hits = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - g[i];
    abs_sum += std::abs(d);
    sq_sum += d * d;
    hits += p[i] == g[i] ? 1 : 0;
  }
  const double n = static_cast<double>(p.size());
  return {abs_sum / n, std::sqrt(sq_sum / n), hits / n};
}

// O(n^2) pair enumeration; tau-b when either side has ties.
inline double kendall(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  long long conc = 0, disc = 0, ties_a = 0, ties_b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j], db = b[i] - b[j];
      if (da == 0) ++ties_a;
      if (db == 0) ++ties_b;
      if (da == 0 || db == 0) continue;
      if ((da > 0) == (db > 0)) ++conc; else ++disc;
    }
  }
  const double pairs = static_cast<double>(n) * (n - 1) / 2.0;
  if (ties_a == 0 && ties_b == 0) return (conc - disc) / pairs;
  return (conc - disc) / std::sqrt((pairs - ties_a) * (pairs - ties_b));
}

// Pearson correlation of the rank vectors; equals the closed form without ties.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= n;
  mb /= n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return cov / std::sqrt(va * vb);
}

// Rank by selection: repeatedly take the highest remaining score, earliest
// index first.
inline std::vector<double> ranking(const std::vector<double>& scores) {
  std::vector<bool> used(scores.size(), false);
  std::vector<double> rank(scores.size());
  for (std::size_t r = 1; r <= scores.size(); ++r) {
    std::size_t best = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (used[i]) continue;
      if (best == scores.size() || scores[i] > scores[best]) best = i;
    }
    used[best] = true;
    rank[best] = static_cast<double>(r);
  }
  return rank;
}

// Tier from the fraction of strictly more valuable items plus half the other
// equal ones, computed by counting.
inline int tier(const std::vector<double>& amounts, std::size_t i) {
  double above = 0, equal_others = 0;
  for (std::size_t j = 0; j < amounts.size(); ++j) {
    if (j == i) continue;
    if (amounts[j] > amounts[i]) above += 1;
    if (amounts[j] == amounts[i]) equal_others += 1;
  }
  const double p = (above + equal_others / 2.0) / static_cast<double>(amounts.size());
  if (p < 0.10 - 1e-12) return 5;
  if (p < 0.60 - 1e-12) return 4;
  return 3;
}

// Integer after the last "marker:" (either colon width) found by a plain scan,
// or -1 when there is none or no digit follows.
inline int last_score(const std::string& text) {
  const std::vector<std::string> markers = {"最终分数", "Final rating"};
  std::size_t value_at = std::string::npos;
  for (std::size_t pos = 0; pos < text.size(); ++pos) {
    for (const auto& m : markers) {
      if (text.compare(pos, m.size(), m) != 0) continue;
      std::size_t k = pos + m.size();
      while (k < text.size() && (text[k] == ' ' || text[k] == '*')) ++k;
      if (k < text.size() && text[k] == ':') {
        value_at = k + 1;
      } else if (text.compare(k, 3, "：") == 0) {
        value_at = k + 3;
      }
    }
  }
  if (value_at == std::string::npos) return -1;
  std::size_t k = value_at;
  while (k < text.size() && (text[k] == ' ' || text[k] == '[' || text[k] == '*')) ++k;
  if (k >= text.size() || text[k] < '0' || text[k] > '9') return -1;
  long value = 0;
  for (; k < text.size() && text[k] >= '0' && text[k] <= '9'; ++k) {
    value = std::min(value * 10 + (text[k] - '0'), 1000L);
  }
  return static_cast<int>(value);
}

}  // namespace oracle
