#include "inkeval/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "inkeval/error.hpp"

namespace inkeval {

// ---------------------------------------------------------------------------
// Errors

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidValue: return "InvalidValue";
    case ErrorKind::NoScoreFound: return "NoScoreFound";
    case ErrorKind::ScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorKind::NonInteger: return "NonInteger";
    case ErrorKind::MalformedJson: return "MalformedJson";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::EmptyGt: return "EmptyGt";
    case ErrorKind::GroupTooSmall: return "GroupTooSmall";
    case ErrorKind::NotAPermutation: return "NotAPermutation";
    case ErrorKind::SizeMismatch: return "SizeMismatch";
    case ErrorKind::EndpointUnavailable: return "EndpointUnavailable";
    case ErrorKind::AuthError: return "AuthError";
    case ErrorKind::ResponseEmpty: return "ResponseEmpty";
    case ErrorKind::RequestRejected: return "RequestRejected";
    case ErrorKind::ScoreUnparseable: return "ScoreUnparseable";
    case ErrorKind::NoValidCandidates: return "NoValidCandidates";
    case ErrorKind::NonPositiveValuation: return "NonPositiveValuation";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::ConstructorUnavailable: return "ConstructorUnavailable";
    case ErrorKind::ScoreInconsistent: return "ScoreInconsistent";
    case ErrorKind::NonPositiveDimensions: return "NonPositiveDimensions";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorKind::ValidationFailure: return "ValidationFailure";
    case ErrorKind::Usage: return "Usage";
  }
  return "Unknown";
}

bool is_external(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EndpointUnavailable:
    case ErrorKind::AuthError:
    case ErrorKind::ResponseEmpty:
    case ErrorKind::RequestRejected:
    case ErrorKind::ConstructorUnavailable:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
      kind_(kind),
      detail_(detail) {}

// ---------------------------------------------------------------------------
// Score

Score::Score(int value) : value_(value) {
  if (value < kMinScore || value > kMaxScore) {
    throw Error(ErrorKind::ScoreOutOfRange,
                "score " + std::to_string(value) + " outside [0,5]");
  }
}

Score Score::from_real(double value) {
  if (!std::isfinite(value) || std::floor(value) != value) {
    throw Error(ErrorKind::NonInteger, "score " + std::to_string(value) + " is not an integer");
  }
  if (value < kMinScore || value > kMaxScore) {
    throw Error(ErrorKind::ScoreOutOfRange,
                "score " + std::to_string(value) + " outside [0,5]");
  }
  return Score(static_cast<int>(value));
}

// ---------------------------------------------------------------------------
// Themes

namespace {

constexpr SubCategory kFigureSubs[] = {
    {"历史故事", "historical story"},
    {"宗教人物", "religious figure"},
    {"文人雅士", "literati and scholars"},
    {"仕女", "court lady"},
    {"市井风俗", "genre painting of urban life"},
    {"农耕商旅", "farming and commerce"},
    {"现实人物", "contemporary figures"},
};

constexpr SubCategory kLandscapeSubs[] = {
    {"青绿山水", "blue&green"},
    {"水墨山水", "ink&wash"},
    {"浅绛山水", "light ocher"},
};

constexpr SubCategory kFlowersBirdsSubs[] = {
    {"花卉", "flower"},
    {"禽鸟", "bird&fowl"},
    {"翎毛", "feather"},
    {"蔬果", "vegetables&fruits"},
    {"草虫", "insect&grass"},
    {"畜兽", "domestic animal"},
    {"鳞介", "scaled&shelled creatures"},
    {"鱼藻", "fish&aquatic plants"},
};

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace

std::span<const SubCategory> sub_categories(MajorTheme major) {
  switch (major) {
    case MajorTheme::Landscape: return kLandscapeSubs;
    case MajorTheme::FlowersBirds: return kFlowersBirdsSubs;
    case MajorTheme::Figure: return kFigureSubs;
  }
  return {};
}

std::string_view chinese_name(MajorTheme major) {
  switch (major) {
    case MajorTheme::Landscape: return "山水";
    case MajorTheme::FlowersBirds: return "花鸟";
    case MajorTheme::Figure: return "人物";
  }
  return "";
}

std::string_view english_name(MajorTheme major) {
  switch (major) {
    case MajorTheme::Landscape: return "Landscape";
    case MajorTheme::FlowersBirds: return "Flowers&Birds";
    case MajorTheme::Figure: return "Figure";
  }
  return "";
}

std::string_view id_name(MajorTheme major) {
  switch (major) {
    case MajorTheme::Landscape: return "landscape";
    case MajorTheme::FlowersBirds: return "flowers_birds";
    case MajorTheme::Figure: return "figure";
  }
  return "";
}

std::optional<MajorTheme> major_from_string(std::string_view text) {
  const std::string lower = ascii_lower(text);
  for (MajorTheme m : kMajorThemes) {
    if (lower == id_name(m) || text == chinese_name(m) || lower == ascii_lower(english_name(m))) {
      return m;
    }
  }
  return std::nullopt;
}

std::optional<std::string> canonical_sub(MajorTheme major, std::string_view text) {
  const std::string lower = ascii_lower(text);
  for (const SubCategory& sub : sub_categories(major)) {
    if (text == sub.canonical || lower == sub.english) return std::string(sub.canonical);
  }
  return std::nullopt;
}

Theme::Theme(MajorTheme major, std::optional<std::string> sub)
    : major_(major), sub_(std::move(sub)) {
  if (sub_) {
    const auto subs = sub_categories(major_);
    const bool known = std::any_of(subs.begin(), subs.end(),
                                   [&](const SubCategory& s) { return s.canonical == *sub_; });
    if (!known) {
      throw Error(ErrorKind::InvalidValue, "Theme: sub-category '" + *sub_ +
                                               "' does not belong to " +
                                               std::string(english_name(major_)));
    }
  }
}

std::string theme_statement(const Theme& theme, Language lang) {
  if (lang == Language::Chinese) {
    std::string out = std::string(chinese_name(theme.major())) + "画";
    if (theme.sub()) out += "（" + *theme.sub() + "）";
    return out;
  }
  std::string out(english_name(theme.major()));
  if (theme.sub()) {
    for (const SubCategory& s : sub_categories(theme.major())) {
      if (s.canonical == *theme.sub()) out += " (" + std::string(s.english) + ")";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Boxes

std::vector<std::string> BoundingBox::violations(double x_min, double y_min, double x_max,
                                                 double y_max) {
  std::vector<std::string> out;
  const double coords[] = {x_min, y_min, x_max, y_max};
  const char* names[] = {"x_min", "y_min", "x_max", "y_max"};
  for (int i = 0; i < 4; ++i) {
    if (!std::isfinite(coords[i])) {
      out.push_back(std::string("BoundingBox: ") + names[i] + " finite violated");
    } else if (coords[i] < 0.0 || coords[i] > 1.0) {
      out.push_back(std::string("BoundingBox: ") + names[i] + " in [0,1] violated");
    }
  }
  if (!(x_min < x_max)) out.emplace_back("BoundingBox: x_min < x_max violated");
  if (!(y_min < y_max)) out.emplace_back("BoundingBox: y_min < y_max violated");
  return out;
}

BoundingBox::BoundingBox(double x_min, double y_min, double x_max, double y_max)
    : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
  const auto broken = violations(x_min, y_min, x_max, y_max);
  if (!broken.empty()) throw Error(ErrorKind::InvalidValue, broken.front());
}

BoundingBox box_from_raw(double x_min, double y_min, double x_max, double y_max, int width,
                         int height) {
  double c[] = {x_min, y_min, x_max, y_max};
  const bool pixels = std::any_of(std::begin(c), std::end(c),
                                  [](double v) { return v > 1.0 + kBoxOvershoot; });
  if (pixels) {
    if (width <= 0 || height <= 0) {
      throw Error(ErrorKind::InvalidValue,
                  "BoundingBox: pixel coordinates require positive image dimensions");
    }
    c[0] /= width;
    c[2] /= width;
    c[1] /= height;
    c[3] /= height;
  }
  for (double& v : c) {
    if (v < 0.0 && v >= -kBoxOvershoot) v = 0.0;
    if (v > 1.0 && v <= 1.0 + kBoxOvershoot) v = 1.0;
  }
  return BoundingBox(c[0], c[1], c[2], c[3]);
}

// ---------------------------------------------------------------------------
// Responses and records

bool ExpertResponse::operator==(const ExpertResponse& other) const {
  return caption == other.caption && theme == other.theme && rois == other.rois &&
         theme_eval == other.theme_eval && tier_eval == other.tier_eval &&
         final_score == other.final_score;
}

bool has_all_parts(const ExpertResponse& r) {
  return !r.caption.empty() && !r.theme_eval.empty() && !r.tier_eval.brush_ink.empty() &&
         !r.tier_eval.spirit_resonance.empty() && !r.tier_eval.artistic_conception.empty();
}

std::string_view to_string(Provenance p) {
  return p == Provenance::Authentic ? "authentic" : "synthetic";
}

std::optional<Provenance> provenance_from_string(std::string_view text) {
  const std::string lower = ascii_lower(text);
  if (lower == "authentic") return Provenance::Authentic;
  if (lower == "synthetic") return Provenance::Synthetic;
  return std::nullopt;
}

bool PaintingRecord::operator==(const PaintingRecord& o) const {
  return id == o.id && image_ref == o.image_ref && width == o.width && height == o.height &&
         provenance == o.provenance && raw_valuation == o.raw_valuation && gt == o.gt &&
         gt.raw_text == o.gt.raw_text && validated == o.validated;
}

std::vector<std::string> validate_record(const PaintingRecord& r) {
  std::vector<std::string> out;
  if (r.id.empty()) out.emplace_back("id: must be non-empty");
  if (r.image_ref.empty()) out.emplace_back("image_ref: must be non-empty");
  if (r.width <= 0) out.emplace_back("width: must be > 0");
  if (r.height <= 0) out.emplace_back("height: must be > 0");

  const int score = r.gt.final_score.value();
  const bool tier_ok = r.provenance == Provenance::Authentic ? (score >= 3 && score <= 5)
                                                             : (score >= 0 && score <= 3);
  if (!tier_ok) out.emplace_back("provenance/score tier mismatch");

  if (r.raw_valuation) {
    if (r.provenance != Provenance::Authentic) {
      out.emplace_back("raw_valuation: only authentic records carry a valuation");
    } else if (!(*r.raw_valuation > 0.0) || !std::isfinite(*r.raw_valuation)) {
      out.emplace_back("raw_valuation: must be a positive amount");
    }
  }

  if (r.gt.caption.empty()) out.emplace_back("gt.caption: must be non-empty");
  if (r.gt.theme_eval.empty()) out.emplace_back("gt.theme_eval: must be non-empty");
  if (r.gt.tier_eval.brush_ink.empty()) out.emplace_back("gt.tier_eval.brush_ink: must be non-empty");
  if (r.gt.tier_eval.spirit_resonance.empty())
    out.emplace_back("gt.tier_eval.spirit_resonance: must be non-empty");
  if (r.gt.tier_eval.artistic_conception.empty())
    out.emplace_back("gt.tier_eval.artistic_conception: must be non-empty");
  for (std::size_t i = 0; i < r.gt.rois.size(); ++i) {
    const std::string field = "gt.rois[" + std::to_string(i) + "]";
    if (r.gt.rois[i].label.empty()) out.push_back(field + ".label: must be non-empty");
    if (r.gt.rois[i].description.empty()) out.push_back(field + ".description: must be non-empty");
  }
  return out;
}

void RewardWeights::check() const {
  const double w[] = {w_acc, w_bert, w_miou, w_format};
  for (double v : w) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorKind::InvalidValue, "RewardWeights: weights must be finite and >= 0");
    }
  }
  if (std::none_of(std::begin(w), std::end(w), [](double v) { return v > 0.0; })) {
    throw Error(ErrorKind::InvalidValue, "RewardWeights: at least one weight must be > 0");
  }
}

void GrpoConfig::check() const {
  if (group_size < 2) throw Error(ErrorKind::GroupTooSmall, "GrpoConfig: group_size must be >= 2");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) {
    throw Error(ErrorKind::InvalidValue, "GrpoConfig: clip_epsilon must lie in (0,1)");
  }
  if (!(std_floor >= 0.0)) throw Error(ErrorKind::InvalidValue, "GrpoConfig: std_floor must be >= 0");
  if (!(max_ratio > 0.0)) throw Error(ErrorKind::InvalidValue, "GrpoConfig: max_ratio must be > 0");
}

}  // namespace inkeval
