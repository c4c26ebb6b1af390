#include "inkeval/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "inkeval/error.hpp"
#include "inkeval/text.hpp"

namespace inkeval {

namespace {

bool is_word_cp(char32_t cp) {
  if ((cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return true;
  if (cp >= 0xC0 && cp <= 0x24F && cp != 0xD7 && cp != 0xF7) return true;  // Latin-1, Extended A/B
  if (cp >= 0x370 && cp <= 0x4FF) return true;                              // Greek, Cyrillic
  return false;
}

char32_t fold_case(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp - 'A' + 'a';
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  return cp;
}

}  // namespace

std::vector<double> SimilarityScorer::batch_similarity(std::span<const TextPair> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(similarity(p.candidate, p.reference));
  return out;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
  };
  for (char32_t cp : text::decode_utf8(s)) {
    if (text::is_cjk(cp)) {
      flush();
      std::string t;
      text::append_utf8(t, cp);
      tokens.push_back(std::move(t));
    } else if (is_word_cp(cp)) {
      text::append_utf8(word, fold_case(cp));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

double token_f1(std::string_view candidate, std::string_view reference) {
  const auto cand = tokenize(candidate);
  const auto ref = tokenize(reference);
  if (cand.empty() || ref.empty()) return 0.0;
  std::unordered_map<std::string, int> ref_counts;
  for (const auto& t : ref) ++ref_counts[t];
  int overlap = 0;
  for (const auto& t : cand) {
    auto it = ref_counts.find(t);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(cand.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(ref.size());
  return 2.0 * precision * recall / (precision + recall);
}

double TokenF1Scorer::similarity(std::string_view candidate, std::string_view reference) {
  if (text::trim(candidate).empty() || text::trim(reference).empty()) {
    spdlog::debug("similarity: empty text scored 0");
    return 0.0;
  }
  return token_f1(candidate, reference);
}

// ---------------------------------------------------------------------------

RemoteScorer::RemoteScorer(RemoteScorerOptions options)
    : options_(std::move(options)),
      url_(net::split_url(options_.endpoint)),
      limiter_(options_.max_inflight) {}

double RemoteScorer::similarity(std::string_view candidate, std::string_view reference) {
  const TextPair pair{std::string(candidate), std::string(reference)};
  return batch_similarity(std::span<const TextPair>(&pair, 1)).front();
}

std::vector<double> RemoteScorer::fallback(std::span<const TextPair> pairs,
                                           const std::string& reason) {
  ++fallbacks_;
  spdlog::warn("similarity: remote backend {} unavailable ({}); downgrading to {}",
               options_.endpoint, reason, builtin_.backend_stamp());
  return builtin_.SimilarityScorer::batch_similarity(pairs);
}

std::vector<double> RemoteScorer::batch_similarity(std::span<const TextPair> pairs) {
  std::vector<double> out(pairs.size(), 0.0);
  std::vector<std::size_t> live;
  nlohmann::json body;
  body["pairs"] = nlohmann::json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (text::trim(pairs[i].candidate).empty() || text::trim(pairs[i].reference).empty()) {
      spdlog::debug("similarity: empty text scored 0");
      continue;
    }
    live.push_back(i);
    body["pairs"].push_back({{"candidate", pairs[i].candidate}, {"reference", pairs[i].reference}});
  }
  if (live.empty()) return out;

  std::vector<TextPair> live_pairs;
  for (std::size_t i : live) live_pairs.push_back(pairs[i]);

  net::HttpResult res;
  {
    InflightLimiter::Permit permit(limiter_);
    ++requests_;
    res = net::post_json(url_, "/similarity",
                         body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace), {},
                         options_.timeout);
  }

  std::vector<double> scores;
  std::string problem;
  if (res.status == 0) {
    problem = res.error;
  } else if (res.status != 200) {
    problem = "HTTP " + std::to_string(res.status);
  } else {
    try {
      const auto reply = nlohmann::json::parse(res.body);
      for (const auto& v : reply.at("scores")) {
        const double x = v.get<double>();
        if (!std::isfinite(x) || x < -1.0 || x > 1.0) {
          problem = "score outside [-1,1]";
          break;
        }
        scores.push_back(std::clamp(x, 0.0, 1.0));
      }
      if (problem.empty() && scores.size() != live.size()) problem = "score count mismatch";
    } catch (const nlohmann::json::exception& e) {
      problem = std::string("malformed reply: ") + e.what();
    }
  }
  if (!problem.empty()) scores = fallback(live_pairs, problem);
  for (std::size_t k = 0; k < live.size(); ++k) out[live[k]] = scores[k];
  return out;
}

std::string RemoteScorer::backend_stamp() const {
  std::string stamp = "remote:" + options_.endpoint;
  if (fallbacks_.load() > 0) stamp += "+fallback:builtin-token-f1";
  return stamp;
}

std::unique_ptr<SimilarityScorer> make_scorer(ScorerBackend backend,
                                              const RemoteScorerOptions& remote) {
  if (backend == ScorerBackend::RemoteService) return std::make_unique<RemoteScorer>(remote);
  return std::make_unique<TokenF1Scorer>();
}

}  // namespace inkeval
