#pragma once

// Best-of-N selection: sample N images, score each with the evaluator model,
// keep the highest-scoring one.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "inkeval/core.hpp"
#include "inkeval/gateway.hpp"
#include "inkeval/serialization.hpp"

namespace inkeval {

struct EvaluatorSettings {
  std::string model_id;
  double temperature = 0.0;
  bool format_guide = true;
};

struct ScoredCandidate {
  std::optional<ExpertResponse> response;  // present when the reply parsed complete
  Score score;
  int attempts = 1;
  std::vector<std::string> warnings;
};

/// Throws ScoreUnparseable when neither the first reply nor the one re-prompt
/// yields a score; gateway errors propagate.
ScoredCandidate score_candidate(const std::string& image_ref, ChatClient& evaluator,
                                const EvaluatorSettings& settings = {});

/// Index of the maximal score, lowest index on ties. Throws NoValidCandidates.
std::size_t select_best(std::span<const std::pair<std::size_t, Score>> scored);

struct BonCandidate {
  std::int64_t seed = 0;
  std::string image_ref;  // empty when generation failed
  std::optional<ExpertResponse> response;
  std::optional<Score> score;
  std::string failure_note;
};

struct BonRunRecord {
  std::string prompt;
  int n = 0;
  std::vector<BonCandidate> candidates;
  std::optional<std::size_t> winner_index;
  // Configuration snapshot.
  std::string evaluator_model;
  std::string template_id;
  std::string t2i_model;
  std::int64_t base_seed = 0;
  Aspect aspect = Aspect::Free;

  bool operator==(const BonRunRecord&) const;
};

struct BonConfig {
  int n = 8;
  std::int64_t base_seed = 0;
  Aspect aspect = Aspect::Free;
  std::string t2i_model;
  EvaluatorSettings evaluator;
  int jobs = 8;
};

/// Candidate i uses seed base_seed + i. Per-candidate failures are recorded
/// and the run continues; when no candidate is scoreable the record is still
/// returned, with winner_index empty. Throws InvalidValue for n < 1.
BonRunRecord run_bon(const std::string& prompt, const BonConfig& config, ImageClient& t2i,
                     ChatClient& evaluator);

Json to_json(const BonRunRecord& record);
BonRunRecord bon_record_from_json(const Json& j);

}  // namespace inkeval
