#include "inkeval/parser.hpp"

#include <algorithm>
#include <array>

#include "inkeval/error.hpp"
#include "inkeval/text.hpp"

namespace inkeval {

namespace {

struct MarkerDef {
  std::string_view part;
  std::string_view sub;  // tier sub-part, empty otherwise
  std::string_view text;
  bool english;
};

constexpr MarkerDef kMarkers[] = {
    {"caption", "", "画面描述", false},
    {"caption", "", "Caption", true},
    {"theme", "", "题材", false},
    {"theme", "", "Theme", true},
    {"rois", "", "感兴趣区域", false},
    {"rois", "", "Regions of Interest", true},
    {"theme_eval", "", "题材评价", false},
    {"theme_eval", "", "Theme-specific evaluation", true},
    {"tier_eval", "brush_ink", "笔墨分析", false},
    {"tier_eval", "brush_ink", "Brush and Ink Analysis", true},
    {"tier_eval", "spirit_resonance", "气韵分析", false},
    {"tier_eval", "spirit_resonance", "Spirit Resonance Analysis", true},
    {"tier_eval", "artistic_conception", "意境分析", false},
    {"tier_eval", "artistic_conception", "Artistic Conception Analysis", true},
    {"score", "", "最终分数", false},
    {"score", "", "Final rating", true},
};

constexpr std::array<std::string_view, 3> kTierNames = {"brush_ink", "spirit_resonance",
                                                        "artistic_conception"};

constexpr std::string_view kFullWidthColon = "：";

const MarkerDef* marker_for(std::string_view part, std::string_view sub, Language lang) {
  for (const auto& m : kMarkers) {
    if (m.part == part && m.sub == sub && m.english == (lang == Language::English)) return &m;
  }
  return nullptr;
}

int canonical_index(std::string_view part) {
  for (std::size_t i = 0; i < kPartNames.size(); ++i) {
    if (kPartNames[i] == part) return static_cast<int>(i);
  }
  return -1;
}

int tier_index(std::string_view sub) {
  for (std::size_t i = 0; i < kTierNames.size(); ++i) {
    if (kTierNames[i] == sub) return static_cast<int>(i);
  }
  return -1;
}

// Skips horizontal whitespace and '*' (markdown bold) starting at pos.
std::size_t skip_decor(std::string_view s, std::size_t pos) {
  while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '*')) ++pos;
  return pos;
}

// Consumes ':' or '：' at pos; returns npos if absent.
std::size_t consume_colon(std::string_view s, std::size_t pos) {
  if (pos < s.size() && s[pos] == ':') return pos + 1;
  if (text::matches_at(s, pos, kFullWidthColon, false)) return pos + kFullWidthColon.size();
  return std::string_view::npos;
}

struct MarkerHit {
  std::size_t offset = 0;
  std::size_t length = 0;
  const MarkerDef* def = nullptr;
};

std::optional<MarkerHit> match_line_marker(std::string_view s, std::size_t line_start) {
  std::size_t pos = line_start;
  while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '*' || s[pos] == '#' ||
                            s[pos] == '>' || s[pos] == '-')) {
    ++pos;
  }
  std::optional<MarkerHit> best;
  for (const auto& m : kMarkers) {
    if (!text::matches_at(s, pos, m.text, m.english)) continue;
    std::size_t end = consume_colon(s, skip_decor(s, pos + m.text.size()));
    if (end == std::string_view::npos) continue;
    while (end < s.size() && s[end] == '*') ++end;
    if (!best || m.text.size() > best->def->text.size()) {
      best = MarkerHit{line_start, end - line_start, &m};
    }
  }
  return best;
}

std::vector<MarkerHit> find_markers(std::string_view s) {
  std::vector<MarkerHit> hits;
  std::size_t line_start = 0;
  while (line_start <= s.size()) {
    if (auto hit = match_line_marker(s, line_start)) hits.push_back(*hit);
    const std::size_t nl = s.find('\n', line_start);
    if (nl == std::string_view::npos) break;
    line_start = nl + 1;
  }
  return hits;
}

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

// Earliest occurrence of needle in hay; English needles match case-insensitively
// on word boundaries.
std::size_t find_keyword(std::string_view hay, std::string_view needle, bool english) {
  for (std::size_t pos = 0; pos + needle.size() <= hay.size(); ++pos) {
    if (!text::matches_at(hay, pos, needle, english)) continue;
    if (english) {
      const bool left_ok = pos == 0 || !is_word_char(hay[pos - 1]);
      const std::size_t end = pos + needle.size();
      const bool right_ok = end >= hay.size() || !is_word_char(hay[end]);
      if (!left_ok || !right_ok) continue;
    }
    return pos;
  }
  return std::string_view::npos;
}

struct ThemeKeyword {
  MajorTheme major;
  std::string_view text;
  bool english;
};

constexpr ThemeKeyword kThemeKeywords[] = {
    {MajorTheme::Landscape, "山水", false},
    {MajorTheme::FlowersBirds, "花鸟", false},
    {MajorTheme::Figure, "人物", false},
    {MajorTheme::Landscape, "landscape", true},
    {MajorTheme::FlowersBirds, "flowers&birds", true},
    {MajorTheme::FlowersBirds, "flower&bird", true},
    {MajorTheme::FlowersBirds, "flowers & birds", true},
    {MajorTheme::FlowersBirds, "flowers and birds", true},
    {MajorTheme::FlowersBirds, "birds and flowers", true},
    {MajorTheme::FlowersBirds, "bird-and-flower", true},
    {MajorTheme::Figure, "figure", true},
};

std::string snippet(std::string_view s, std::size_t max_bytes = 48) {
  std::string out;
  for (char32_t cp : text::decode_utf8(s.substr(0, std::min(s.size(), max_bytes * 2)))) {
    if (out.size() >= max_bytes) {
      out += "...";
      break;
    }
    text::append_utf8(out, cp == '\n' ? U' ' : cp);
  }
  return out;
}

// End (exclusive) of the brace-balanced object starting at `start`, or npos.
std::size_t match_braces(std::string_view s, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::string require_text(const nlohmann::json& obj, const char* key, std::size_t index) {
  if (!obj.contains(key) || !obj.at(key).is_string()) {
    throw Error(ErrorKind::SchemaMismatch,
                "region " + std::to_string(index) + " lacks string '" + key + "'");
  }
  std::string value = text::trim(obj.at(key).get<std::string>());
  if (value.empty()) {
    throw Error(ErrorKind::SchemaMismatch,
                "region " + std::to_string(index) + " has empty '" + key + "'");
  }
  return value;
}

std::vector<RoiRegion> regions_from_json(const nlohmann::json& j, int width, int height,
                                         std::vector<std::string>& warnings) {
  if (!j.is_object()) throw Error(ErrorKind::SchemaMismatch, "block is not a JSON object");
  if (!j.contains("regions_of_interest") || !j.at("regions_of_interest").is_array()) {
    throw Error(ErrorKind::SchemaMismatch, "missing 'regions_of_interest' array");
  }
  if (width <= 0 && j.contains("width") && j.at("width").is_number()) {
    width = static_cast<int>(j.at("width").get<double>());
  }
  if (height <= 0 && j.contains("height") && j.at("height").is_number()) {
    height = static_cast<int>(j.at("height").get<double>());
  }
  std::vector<RoiRegion> regions;
  const auto& list = j.at("regions_of_interest");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& r = list[i];
    if (!r.is_object()) {
      throw Error(ErrorKind::SchemaMismatch, "region " + std::to_string(i) + " is not an object");
    }
    std::string label = require_text(r, "label", i);
    std::string description = require_text(r, "description", i);
    if (!r.contains("bounding_box") || !r.at("bounding_box").is_object()) {
      throw Error(ErrorKind::SchemaMismatch,
                  "region " + std::to_string(i) + " lacks 'bounding_box' object");
    }
    const auto& b = r.at("bounding_box");
    double c[4];
    const char* keys[] = {"x_min", "y_min", "x_max", "y_max"};
    for (int k = 0; k < 4; ++k) {
      if (!b.contains(keys[k]) || !b.at(keys[k]).is_number()) {
        throw Error(ErrorKind::SchemaMismatch, "region " + std::to_string(i) +
                                                   " bounding_box lacks number '" + keys[k] + "'");
      }
      c[k] = b.at(keys[k]).get<double>();
    }
    try {
      regions.push_back(RoiRegion{std::move(label), std::move(description),
                                  box_from_raw(c[0], c[1], c[2], c[3], width, height)});
    } catch (const Error& e) {
      throw Error(ErrorKind::SchemaMismatch, "region " + std::to_string(i) + ": " + e.detail());
    }
  }
  if (j.contains("num_regions") && j.at("num_regions").is_number()) {
    const double declared = j.at("num_regions").get<double>();
    if (declared != static_cast<double>(regions.size())) {
      warnings.push_back("num_regions mismatch (declared " + j.at("num_regions").dump() +
                         ", found " + std::to_string(regions.size()) + ")");
    }
  }
  return regions;
}

std::string join_descriptions(const std::vector<RoiRegion>& rois) {
  std::string out;
  for (const auto& r : rois) {
    if (!out.empty()) out += "\n";
    out += r.description;
  }
  return out;
}

std::string join_tiers(const std::string& a, const std::string& b, const std::string& c) {
  std::string out;
  for (const std::string* s : {&a, &b, &c}) {
    if (s->empty()) continue;
    if (!out.empty()) out += "\n";
    out += *s;
  }
  return out;
}

PartTexts build_parts(const std::string& caption, const std::optional<Theme>& theme,
                      const std::optional<std::vector<RoiRegion>>& rois,
                      const std::string& theme_eval, const TierEvaluation& tier,
                      const std::optional<Score>& score) {
  PartTexts parts;
  parts[0] = text::normalize_whitespace(caption);
  parts[1] = theme ? theme_statement(*theme, Language::Chinese) : std::string();
  parts[2] = rois ? text::normalize_whitespace(join_descriptions(*rois)) : std::string();
  parts[3] = text::normalize_whitespace(theme_eval);
  parts[4] = text::normalize_whitespace(
      join_tiers(tier.brush_ink, tier.spirit_resonance, tier.artistic_conception));
  parts[5] = score ? std::to_string(score->value()) : std::string();
  return parts;
}

}  // namespace

// ---------------------------------------------------------------------------

Segmentation segment_sections(std::string_view s) {
  Segmentation seg;
  const auto hits = find_markers(s);

  const std::size_t lead_end = hits.empty() ? s.size() : hits.front().offset;
  if (lead_end > 0) {
    const std::string lead(s.substr(0, lead_end));
    const bool has_caption_marker = std::any_of(
        hits.begin(), hits.end(), [](const MarkerHit& h) { return h.def->part == "caption"; });
    const bool blank = text::trim(lead).empty();
    Section sec{"preamble", "", lead, 0, {}};
    if (!blank && !has_caption_marker && !hits.empty() && hits.front().def->part == "theme") {
      sec.name = "caption";
    } else if (!blank) {
      seg.warnings.push_back("unmatched text before the first section marker kept as preamble");
    }
    seg.sections.push_back(std::move(sec));
  }

  for (std::size_t i = 0; i < hits.size(); ++i) {
    const MarkerHit& h = hits[i];
    const std::size_t body_start = h.offset + h.length;
    const std::size_t body_end = i + 1 < hits.size() ? hits[i + 1].offset : s.size();
    Section sub{std::string(h.def->sub), std::string(s.substr(h.offset, h.length)),
                std::string(s.substr(body_start, body_end - body_start)), h.offset, {}};

    if (h.def->part == "tier_eval") {
      Section* open = seg.sections.empty() ? nullptr : &seg.sections.back();
      const bool continues =
          open && open->name == "tier_eval" &&
          std::none_of(open->subsections.begin(), open->subsections.end(),
                       [&](const Section& x) { return x.name == sub.name; });
      if (continues) {
        open->body += sub.marker + sub.body;
        if (tier_index(sub.name) < tier_index(open->subsections.back().name)) {
          seg.warnings.push_back("tier section '" + sub.name + "' out of canonical order");
        }
        open->subsections.push_back(std::move(sub));
        continue;
      }
      Section sec{"tier_eval", sub.marker, sub.body, h.offset, {}};
      sec.subsections.push_back(std::move(sub));
      seg.sections.push_back(std::move(sec));
      continue;
    }
    seg.sections.push_back(Section{std::string(h.def->part), sub.marker, sub.body, h.offset, {}});
  }

  int max_seen = -1;
  std::vector<std::string> seen;
  for (const auto& sec : seg.sections) {
    const int idx = canonical_index(sec.name);
    if (idx < 0) continue;
    if (std::find(seen.begin(), seen.end(), sec.name) != seen.end()) {
      seg.warnings.push_back("duplicate section '" + sec.name + "'");
    } else {
      seen.push_back(sec.name);
    }
    if (idx < max_seen) {
      seg.warnings.push_back("section '" + sec.name + "' out of canonical order");
    }
    max_seen = std::max(max_seen, idx);
  }
  for (std::string_view part : kPartNames) {
    if (std::find(seen.begin(), seen.end(), part) == seen.end()) {
      seg.missing_parts.emplace_back(part);
    }
  }
  return seg;
}

std::string reassemble(const Segmentation& seg) {
  std::string out;
  for (const auto& sec : seg.sections) out += sec.marker + sec.body;
  return out;
}

Score extract_final_score(std::string_view s) {
  if (s.empty()) throw Error(ErrorKind::NoScoreFound, "empty text");
  std::size_t last_value = std::string_view::npos;
  for (std::size_t pos = 0; pos < s.size(); ++pos) {
    for (const auto& m : kMarkers) {
      if (m.part != "score" || !text::matches_at(s, pos, m.text, m.english)) continue;
      const std::size_t end = consume_colon(s, skip_decor(s, pos + m.text.size()));
      if (end != std::string_view::npos) last_value = end;
    }
  }
  if (last_value == std::string_view::npos) {
    throw Error(ErrorKind::NoScoreFound, "no '最终分数:' or 'Final rating:' marker");
  }

  std::size_t p = last_value;
  for (;;) {
    if (p < s.size() && (s[p] == ' ' || s[p] == '\t' || s[p] == '*' || s[p] == '[' ||
                         s[p] == '(')) {
      ++p;
    } else if (text::matches_at(s, p, "【", false) || text::matches_at(s, p, "　", false)) {
      p += 3;
    } else {
      break;
    }
  }
  std::size_t q = p;
  if (q < s.size() && (s[q] == '-' || s[q] == '+')) ++q;
  const std::size_t digits_begin = q;
  while (q < s.size() && s[q] >= '0' && s[q] <= '9') ++q;
  const std::string token(s.substr(p, q - p));
  if (q == digits_begin) {
    throw Error(ErrorKind::NonInteger, "score token '" + snippet(s.substr(p), 16) + "' is not an integer");
  }
  if (q < s.size() && s[q] == '.' && q + 1 < s.size() && s[q + 1] >= '0' && s[q + 1] <= '9') {
    throw Error(ErrorKind::NonInteger, "score token '" + snippet(s.substr(p), 16) + "' is not an integer");
  }
  if (q - digits_begin > 3) throw Error(ErrorKind::ScoreOutOfRange, "score " + token + " outside [0,5]");
  return Score(std::stoi(token));
}

std::optional<RoiBlock> parse_roi_block(std::string_view s, int width, int height) {
  std::optional<Error> first_error;
  bool any_candidate = false;
  std::size_t i = 0;
  while ((i = s.find('{', i)) != std::string_view::npos) {
    any_candidate = true;
    const std::size_t end = match_braces(s, i);
    const std::string_view block =
        s.substr(i, end == std::string_view::npos ? std::string_view::npos : end - i);
    const std::string where = "block at byte " + std::to_string(i) + " '" + snippet(block) + "'";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(block);
    } catch (const nlohmann::json::exception& e) {
      if (!first_error) first_error = Error(ErrorKind::MalformedJson, where + ": " + e.what());
      ++i;
      continue;
    }
    try {
      RoiBlock out;
      out.offset = i;
      out.regions = regions_from_json(j, width, height, out.warnings);
      return out;
    } catch (const Error& e) {
      if (!first_error) first_error = Error(ErrorKind::SchemaMismatch, where + ": " + e.detail());
    }
    i = end;
  }
  if (!any_candidate) return std::nullopt;
  throw *first_error;
}

std::optional<Theme> detect_theme(std::string_view theme_text) {
  std::optional<MajorTheme> major;
  std::size_t best_pos = std::string_view::npos;
  std::size_t best_len = 0;
  for (const auto& kw : kThemeKeywords) {
    const std::size_t pos = find_keyword(theme_text, kw.text, kw.english);
    if (pos == std::string_view::npos) continue;
    if (pos < best_pos || (pos == best_pos && kw.text.size() > best_len)) {
      best_pos = pos;
      best_len = kw.text.size();
      major = kw.major;
    }
  }
  if (!major) return std::nullopt;

  std::optional<std::string> sub;
  std::size_t sub_pos = std::string_view::npos;
  for (const SubCategory& sc : sub_categories(*major)) {
    for (const auto& [needle, english] :
         {std::pair{sc.canonical, false}, std::pair{sc.english, true}}) {
      const std::size_t pos = find_keyword(theme_text, needle, english);
      if (pos != std::string_view::npos && pos < sub_pos) {
        sub_pos = pos;
        sub = std::string(sc.canonical);
      }
    }
  }
  return Theme(*major, std::move(sub));
}

ParseReport parse_expert_response(std::string_view s, int width, int height) {
  ParseReport rep;
  const Segmentation seg = segment_sections(s);
  rep.warnings = seg.warnings;

  auto first = [&](std::string_view name) -> const Section* {
    for (const auto& sec : seg.sections) {
      if (sec.name == name) return &sec;
    }
    return nullptr;
  };

  std::string caption;
  if (const Section* sec = first("caption")) caption = text::trim(sec->body);

  if (const Section* sec = first("theme")) {
    rep.theme = detect_theme(sec->body);
    if (!rep.theme) rep.warnings.push_back("theme: no recognized theme keyword in theme section");
  }

  std::string theme_eval;
  if (const Section* sec = first("theme_eval")) theme_eval = text::trim(sec->body);

  TierEvaluation tier;
  if (const Section* sec = first("tier_eval")) {
    for (const auto& sub : sec->subsections) {
      std::string body = text::trim(sub.body);
      if (sub.name == "brush_ink") tier.brush_ink = std::move(body);
      if (sub.name == "spirit_resonance") tier.spirit_resonance = std::move(body);
      if (sub.name == "artistic_conception") tier.artistic_conception = std::move(body);
    }
  }

  try {
    rep.score = extract_final_score(s);
  } catch (const Error& e) {
    rep.warnings.push_back(std::string("score: ") + e.what());
  }

  try {
    if (auto block = parse_roi_block(s, width, height)) {
      rep.rois = std::move(block->regions);
      for (auto& w : block->warnings) rep.warnings.push_back("rois: " + w);
    } else {
      rep.warnings.emplace_back("rois: no JSON block found");
    }
  } catch (const Error& e) {
    rep.warnings.push_back(std::string("rois: ") + e.what());
  }

  if (caption.empty()) rep.missing_parts.emplace_back("caption");
  if (!rep.theme) rep.missing_parts.emplace_back("theme");
  if (!rep.rois) rep.missing_parts.emplace_back("rois");
  if (theme_eval.empty()) rep.missing_parts.emplace_back("theme_eval");
  if (tier.brush_ink.empty() || tier.spirit_resonance.empty() || tier.artistic_conception.empty()) {
    rep.missing_parts.emplace_back("tier_eval");
  }
  if (!rep.score) rep.missing_parts.emplace_back("score");

  rep.parts = build_parts(caption, rep.theme, rep.rois, theme_eval, tier, rep.score);
  rep.complete = rep.missing_parts.empty();
  if (rep.complete) {
    rep.response = ExpertResponse{std::move(caption), *rep.theme,       *rep.rois,
                                  std::move(theme_eval), std::move(tier), *rep.score,
                                  std::string(s)};
  }
  return rep;
}

PartTexts reward_parts(const ExpertResponse& r) {
  return build_parts(r.caption, r.theme, r.rois, r.theme_eval, r.tier_eval, r.final_score);
}

std::string render_expert_response(const ExpertResponse& r, Language lang, int width,
                                   int height) {
  auto mk = [&](std::string_view part, std::string_view sub = "") {
    return std::string(marker_for(part, sub, lang)->text) + ":";
  };
  Json block;
  if (height > 0) block["height"] = height;
  if (width > 0) block["width"] = width;
  block["num_regions"] = r.rois.size();
  Json list = Json::array();
  for (const auto& roi : r.rois) list.push_back(to_json(roi));
  block["regions_of_interest"] = std::move(list);

  std::string out;
  out += mk("caption") + " " + r.caption + "\n\n";
  out += mk("theme") + " " + theme_statement(r.theme, lang) + "\n\n";
  out += mk("rois") + "\n" + block.dump(2) + "\n\n";
  out += mk("theme_eval") + " " + r.theme_eval + "\n\n";
  out += mk("tier_eval", "brush_ink") + " " + r.tier_eval.brush_ink + "\n\n";
  out += mk("tier_eval", "spirit_resonance") + " " + r.tier_eval.spirit_resonance + "\n\n";
  out += mk("tier_eval", "artistic_conception") + " " + r.tier_eval.artistic_conception + "\n\n";
  out += mk("score") + " " + std::to_string(r.final_score.value()) + "\n";
  return out;
}

Json to_json(const ParseReport& rep) {
  Json j;
  j["complete"] = rep.complete;
  j["missing_parts"] = rep.missing_parts;
  j["warnings"] = rep.warnings;
  j["score"] = rep.score ? Json(rep.score->value()) : Json(nullptr);
  j["theme"] = rep.theme ? to_json(*rep.theme) : Json(nullptr);
  if (rep.rois) {
    Json list = Json::array();
    for (const auto& roi : *rep.rois) list.push_back(to_json(roi));
    j["rois"] = std::move(list);
  } else {
    j["rois"] = nullptr;
  }
  Json parts;
  for (std::size_t i = 0; i < kPartCount; ++i) parts[std::string(kPartNames[i])] = rep.parts[i];
  j["parts"] = std::move(parts);
  j["response"] = rep.response ? to_json(*rep.response) : Json(nullptr);
  return j;
}

}  // namespace inkeval
