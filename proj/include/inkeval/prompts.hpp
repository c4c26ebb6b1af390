#pragma once

// Prompt templates sent to the evaluator and constructor models. The Chinese
// wording is the protocol; do not edit a template without bumping its id.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inkeval/core.hpp"

namespace inkeval::prompts {

inline constexpr std::string_view kExpertCotId = "expert-cot-zh-v1";
inline constexpr std::string_view kT2iPromptsId = "t2i-prompts-zh-v1";
inline constexpr std::string_view kCotDialogueId = "cot-dialogue-zh-v1";
inline constexpr int kCotRounds = 5;
inline constexpr int kT2iPromptCount = 20;

/// The single-turn expert evaluation prompt. With `format_guide`, a block
/// naming the section markers the parser expects is appended.
std::string expert_cot(bool format_guide = true);

/// Appended on the one re-prompt after an unparseable score.
std::string_view score_format_reminder();

std::string_view t2i_prompt_generation();

/// Bodies of "[PromptN]: ..." entries in order of appearance.
std::vector<std::string> parse_t2i_prompts(std::string_view text);

/// User turn for dialogue round 1..5. Round 2 embeds the image size.
/// Throws InvalidValue for other rounds.
std::string cot_round(int round, int width, int height);

/// Appended to the round-5 turn when it is re-issued after an inconsistent score.
std::string_view round5_retry_note();

/// System message disclosing the ground-truth score and provenance.
std::string preconditioning(Score score, Provenance provenance);

struct Preconditioning {
  Score score;
  Provenance provenance;
};

/// Inverse of preconditioning(), for mocks and audits.
std::optional<Preconditioning> parse_preconditioning(std::string_view text);

/// Section marker each dialogue round's reply belongs under; empty for
/// rounds whose reply carries its own markers.
std::string_view round_marker(int round);

}  // namespace inkeval::prompts
