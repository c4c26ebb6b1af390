#pragma once

// Pluggable text similarity used by the part-wise reward, the RoI
// description reward and the corpus metrics. Scores are always in [0,1].

#include <atomic>
#include <chrono>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inkeval/net.hpp"
#include "inkeval/parallel.hpp"

namespace inkeval {

struct TextPair {
  std::string candidate;
  std::string reference;
};

class SimilarityScorer {
 public:
  virtual ~SimilarityScorer() = default;

  virtual double similarity(std::string_view candidate, std::string_view reference) = 0;

  /// Element i equals similarity(pairs[i]).
  virtual std::vector<double> batch_similarity(std::span<const TextPair> pairs);

  /// Which backend produced the numbers, recorded in metric reports.
  virtual std::string backend_stamp() const = 0;
};

/// Unigram tokens: each CJK code point is a token; other letter/digit runs are
/// lowercased tokens; everything else separates.
std::vector<std::string> tokenize(std::string_view text);

/// Harmonic mean of clipped unigram precision and recall; 0 if either side
/// has no tokens.
double token_f1(std::string_view candidate, std::string_view reference);

class TokenF1Scorer final : public SimilarityScorer {
 public:
  double similarity(std::string_view candidate, std::string_view reference) override;
  std::string backend_stamp() const override { return "builtin-token-f1"; }
};

struct RemoteScorerOptions {
  std::string endpoint;  // base URL; requests go to {endpoint}/similarity
  std::chrono::milliseconds timeout{10000};
  int max_inflight = 8;
};

/// Client for the similarity sidecar. Any transport failure, non-200 status
/// or malformed reply falls back to TokenF1Scorer for that request.
class RemoteScorer final : public SimilarityScorer {
 public:
  explicit RemoteScorer(RemoteScorerOptions options);

  double similarity(std::string_view candidate, std::string_view reference) override;
  std::vector<double> batch_similarity(std::span<const TextPair> pairs) override;
  std::string backend_stamp() const override;

  int fallback_count() const noexcept { return fallbacks_.load(); }
  int request_count() const noexcept { return requests_.load(); }

 private:
  std::vector<double> fallback(std::span<const TextPair> pairs, const std::string& reason);

  RemoteScorerOptions options_;
  net::Url url_;
  TokenF1Scorer builtin_;
  InflightLimiter limiter_;
  std::atomic<int> fallbacks_{0};
  std::atomic<int> requests_{0};
};

enum class ScorerBackend { BuiltinTokenF1, RemoteService };

std::unique_ptr<SimilarityScorer> make_scorer(ScorerBackend backend,
                                              const RemoteScorerOptions& remote = {});

}  // namespace inkeval
