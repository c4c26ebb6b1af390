#include "inkeval/bon.hpp"

#include <spdlog/spdlog.h>

#include "inkeval/error.hpp"
#include "inkeval/parallel.hpp"
#include "inkeval/parser.hpp"
#include "inkeval/prompts.hpp"

namespace inkeval {

bool BonRunRecord::operator==(const BonRunRecord& o) const { return to_json(*this) == to_json(o); }

ScoredCandidate score_candidate(const std::string& image_ref, ChatClient& evaluator,
                                const EvaluatorSettings& settings) {
  const std::string base_prompt = prompts::expert_cot(settings.format_guide);
  std::string last_problem;
  for (int attempt = 1; attempt <= 2; ++attempt) {
    ChatRequest req;
    req.model_id = settings.model_id;
    req.temperature = settings.temperature;
    std::string text = base_prompt;
    if (attempt == 2) text += prompts::score_format_reminder();
    req.messages.push_back(ChatMessage{"user", std::move(text), image_ref});
    const std::string reply = evaluator.chat(req);
    ParseReport report = parse_expert_response(reply);
    if (report.score) {
      return ScoredCandidate{std::move(report.response), *report.score, attempt,
                             std::move(report.warnings)};
    }
    try {
      (void)extract_final_score(reply);
    } catch (const Error& e) {
      last_problem = std::string(to_string(e.kind())) + ": " + e.detail();
    }
    spdlog::debug("score_candidate: attempt {} for {} has no score ({})", attempt, image_ref,
                  last_problem);
  }
  throw Error(ErrorKind::ScoreUnparseable,
              "no parseable score after one re-prompt (" + last_problem + ")");
}

std::size_t select_best(std::span<const std::pair<std::size_t, Score>> scored) {
  if (scored.empty()) throw Error(ErrorKind::NoValidCandidates, "no candidate has a valid score");
  auto best = scored.front();
  for (const auto& c : scored) {
    if (c.second > best.second || (c.second == best.second && c.first < best.first)) best = c;
  }
  return best.first;
}

BonRunRecord run_bon(const std::string& prompt, const BonConfig& config, ImageClient& t2i,
                     ChatClient& evaluator) {
  if (config.n < 1) throw Error(ErrorKind::InvalidValue, "n must be >= 1");
  BonRunRecord rec;
  rec.prompt = prompt;
  rec.n = config.n;
  rec.evaluator_model = config.evaluator.model_id;
  rec.template_id = std::string(prompts::kExpertCotId);
  rec.t2i_model = config.t2i_model;
  rec.base_seed = config.base_seed;
  rec.aspect = config.aspect;
  rec.candidates.resize(static_cast<std::size_t>(config.n));

  parallel_for(rec.candidates.size(), config.jobs, [&](std::size_t i) {
    BonCandidate& c = rec.candidates[i];
    c.seed = config.base_seed + static_cast<std::int64_t>(i);
    try {
      c.image_ref = t2i.generate_image(
          GenerationRequest{prompt, config.aspect, config.t2i_model, c.seed});
      auto scored = score_candidate(c.image_ref, evaluator, config.evaluator);
      c.response = std::move(scored.response);
      c.score = scored.score;
    } catch (const Error& e) {
      c.failure_note = std::string(to_string(e.kind())) + ": " + e.detail();
      spdlog::warn("bon: candidate {} failed: {}", i, c.failure_note);
    }
  });

  std::vector<std::pair<std::size_t, Score>> scored;
  for (std::size_t i = 0; i < rec.candidates.size(); ++i) {
    if (rec.candidates[i].score) scored.emplace_back(i, *rec.candidates[i].score);
  }
  if (!scored.empty()) rec.winner_index = select_best(scored);
  return rec;
}

Json to_json(const BonRunRecord& r) {
  Json cands = Json::array();
  for (const auto& c : r.candidates) {
    Json jc;
    jc["seed"] = c.seed;
    jc["image_ref"] = c.image_ref;
    jc["score"] = c.score ? Json(c.score->value()) : Json(nullptr);
    jc["failure_note"] = c.failure_note;
    jc["response"] = c.response ? to_json(*c.response) : Json(nullptr);
    cands.push_back(std::move(jc));
  }
  Json j;
  j["prompt"] = r.prompt;
  j["n"] = r.n;
  j["winner_index"] = r.winner_index ? Json(*r.winner_index) : Json(nullptr);
  j["config"] = Json{{"evaluator_model", r.evaluator_model},
                     {"template_id", r.template_id},
                     {"t2i_model", r.t2i_model},
                     {"base_seed", r.base_seed},
                     {"aspect", std::string(to_string(r.aspect))}};
  j["candidates"] = std::move(cands);
  return j;
}

BonRunRecord bon_record_from_json(const Json& j) {
  try {
    BonRunRecord r;
    r.prompt = j.at("prompt").get<std::string>();
    r.n = j.at("n").get<int>();
    if (!j.at("winner_index").is_null()) r.winner_index = j.at("winner_index").get<std::size_t>();
    const auto& cfg = j.at("config");
    r.evaluator_model = cfg.at("evaluator_model").get<std::string>();
    r.template_id = cfg.at("template_id").get<std::string>();
    r.t2i_model = cfg.at("t2i_model").get<std::string>();
    r.base_seed = cfg.at("base_seed").get<std::int64_t>();
    r.aspect = aspect_from_string(cfg.at("aspect").get<std::string>()).value_or(Aspect::Free);
    for (const auto& jc : j.at("candidates")) {
      BonCandidate c;
      c.seed = jc.at("seed").get<std::int64_t>();
      c.image_ref = jc.at("image_ref").get<std::string>();
      if (!jc.at("score").is_null()) c.score = Score(jc.at("score").get<int>());
      c.failure_note = jc.at("failure_note").get<std::string>();
      if (!jc.at("response").is_null()) c.response = expert_response_from_json(jc.at("response"));
      r.candidates.push_back(std::move(c));
    }
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, std::string("BoN record: ") + e.what());
  }
}

}  // namespace inkeval
