#pragma once

// Turns raw evaluator output into a structured ExpertResponse.
//
// Section markers (Chinese first, English fallback), each at a line start and
// followed by ':' or '：':
//
//   caption      画面描述 / Caption           (optional; leading text before
//                                             the theme marker also counts)
//   theme        题材 / Theme
//   rois         感兴趣区域 / Regions of Interest  (+ JSON block)
//   theme_eval   题材评价 / Theme-specific evaluation
//   tier_eval    笔墨分析 / Brush and Ink Analysis,
//                气韵分析 / Spirit Resonance Analysis,
//                意境分析 / Artistic Conception Analysis
//   score        最终分数 / Final rating

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inkeval/core.hpp"
#include "inkeval/serialization.hpp"

namespace inkeval {

struct Section {
  std::string name;    // one of kPartNames, a tier sub-name, or "preamble"
  std::string marker;  // exact matched marker text, empty for leading text
  std::string body;
  std::size_t offset = 0;
  std::vector<Section> subsections;  // tier_eval only; spans its body
};

struct Segmentation {
  std::vector<Section> sections;  // document order; marker+body concatenates to input
  std::vector<std::string> missing_parts;
  std::vector<std::string> warnings;
};

Segmentation segment_sections(std::string_view text);

/// Reassembles the input from a segmentation.
std::string reassemble(const Segmentation& seg);

/// Integer after the last score marker. Throws NoScoreFound, NonInteger or
/// ScoreOutOfRange.
Score extract_final_score(std::string_view text);

struct RoiBlock {
  std::vector<RoiRegion> regions;
  std::vector<std::string> warnings;
  std::size_t offset = 0;  // byte offset of the block's opening brace
};

/// First schema-valid region JSON object in `text`. Returns nullopt when the
/// text holds no JSON object at all; throws MalformedJson or SchemaMismatch
/// (for the first failing candidate) when candidates exist but none is valid.
std::optional<RoiBlock> parse_roi_block(std::string_view text, int width, int height);

/// Major theme named in a theme statement (earliest keyword wins) and the
/// sub-category, when one of that theme's is mentioned.
std::optional<Theme> detect_theme(std::string_view theme_text);

struct ParseReport {
  std::optional<ExpertResponse> response;  // present iff complete
  bool complete = false;
  std::vector<std::string> missing_parts;
  std::vector<std::string> warnings;

  // Whatever could be recovered, also for incomplete responses.
  std::optional<Score> score;
  std::optional<Theme> theme;
  std::optional<std::vector<RoiRegion>> rois;
  PartTexts parts;
};

/// Never throws; every failure is recorded in the report.
ParseReport parse_expert_response(std::string_view text, int width = 0, int height = 0);

/// The K normalized part texts used by the similarity reward.
PartTexts reward_parts(const ExpertResponse& response);

/// Gold-format text that parse_expert_response maps back to `response`.
std::string render_expert_response(const ExpertResponse& response,
                                   Language lang = Language::Chinese, int width = 0,
                                   int height = 0);

Json to_json(const ParseReport& report);

}  // namespace inkeval
