#pragma once

// Shared domain types for painting evaluation records and model responses.
// Value types validate on construction and are immutable afterwards.

#include <array>
#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace inkeval {

inline constexpr int kMinScore = 0;
inline constexpr int kMaxScore = 5;

/// Integer artistic-value rating in [0, 5].
class Score {
 public:
  explicit Score(int value);

  /// Accepts a real only if it is integral and in range.
  static Score from_real(double value);

  int value() const noexcept { return value_; }

  auto operator<=>(const Score&) const = default;

 private:
  int value_;
};

enum class Language { Chinese, English };

enum class MajorTheme { Landscape, FlowersBirds, Figure };

inline constexpr std::array<MajorTheme, 3> kMajorThemes = {
    MajorTheme::Landscape, MajorTheme::FlowersBirds, MajorTheme::Figure};

struct SubCategory {
  std::string_view canonical;  // Chinese, authoritative
  std::string_view english;
};

std::span<const SubCategory> sub_categories(MajorTheme major);

/// "山水", "花鸟", "人物".
std::string_view chinese_name(MajorTheme major);
/// "Landscape", "Flowers&Birds", "Figure".
std::string_view english_name(MajorTheme major);
/// Stable identifier used in files: "landscape", "flowers_birds", "figure".
std::string_view id_name(MajorTheme major);

/// Accepts the id name, Chinese name or English name.
std::optional<MajorTheme> major_from_string(std::string_view text);

/// Maps a canonical Chinese sub-category or its English alias (case-insensitive)
/// to the canonical form, if it belongs to `major`.
std::optional<std::string> canonical_sub(MajorTheme major, std::string_view text);

class Theme {
 public:
  /// `sub`, when present, must be a canonical sub-category of `major`.
  explicit Theme(MajorTheme major, std::optional<std::string> sub = std::nullopt);

  MajorTheme major() const noexcept { return major_; }
  const std::optional<std::string>& sub() const noexcept { return sub_; }

  bool operator==(const Theme&) const = default;

 private:
  MajorTheme major_;
  std::optional<std::string> sub_;
};

/// Human-readable theme statement, e.g. "山水画（青绿山水）" or "Landscape (blue&green)".
std::string theme_statement(const Theme& theme, Language lang);

/// Axis-aligned box in normalized [0,1] coordinates, origin top-left.
class BoundingBox {
 public:
  BoundingBox(double x_min, double y_min, double x_max, double y_max);

  /// Every broken invariant for the given coordinates; empty when valid.
  static std::vector<std::string> violations(double x_min, double y_min, double x_max,
                                             double y_max);

  double x_min() const noexcept { return x_min_; }
  double y_min() const noexcept { return y_min_; }
  double x_max() const noexcept { return x_max_; }
  double y_max() const noexcept { return y_max_; }
  double area() const noexcept { return (x_max_ - x_min_) * (y_max_ - y_min_); }

  bool operator==(const BoundingBox&) const = default;

 private:
  double x_min_, y_min_, x_max_, y_max_;
};

/// Relative overshoot beyond [0,1] that is clamped instead of rejected.
inline constexpr double kBoxOvershoot = 0.01;

/// Builds a normalized box from model-provided coordinates. Coordinates above
/// 1 + kBoxOvershoot are taken as pixels and divided by width/height; small
/// overshoots are clamped. Throws Error(InvalidValue) otherwise.
BoundingBox box_from_raw(double x_min, double y_min, double x_max, double y_max, int width,
                         int height);

struct RoiRegion {
  std::string label;
  std::string description;
  BoundingBox box;

  bool operator==(const RoiRegion&) const = default;
};

struct TierEvaluation {
  std::string brush_ink;
  std::string spirit_resonance;
  std::string artistic_conception;

  bool operator==(const TierEvaluation&) const = default;
};

/// The six-part expert chain of thought.
struct ExpertResponse {
  std::string caption;
  Theme theme;
  std::vector<RoiRegion> rois;
  std::string theme_eval;
  TierEvaluation tier_eval;
  Score final_score;
  std::string raw_text;

  /// Compares content only; raw_text is provenance.
  bool operator==(const ExpertResponse& other) const;
};

/// Every textual part is non-empty.
bool has_all_parts(const ExpertResponse& response);

/// Names of the K parts scored by the similarity reward, in canonical order.
inline constexpr std::array<std::string_view, 6> kPartNames = {
    "caption", "theme", "rois", "theme_eval", "tier_eval", "score"};
inline constexpr std::size_t kPartCount = kPartNames.size();

using PartTexts = std::array<std::string, kPartCount>;

enum class Provenance { Authentic, Synthetic };

std::string_view to_string(Provenance p);
std::optional<Provenance> provenance_from_string(std::string_view text);

struct PaintingRecord {
  std::string id;
  std::string image_ref;
  int width = 0;
  int height = 0;
  Provenance provenance = Provenance::Synthetic;
  std::optional<double> raw_valuation;
  ExpertResponse gt;
  bool validated = false;

  bool operator==(const PaintingRecord& other) const;
};

/// Every broken invariant of the record; each entry names the field and rule.
std::vector<std::string> validate_record(const PaintingRecord& record);

struct RewardWeights {
  double w_acc = 10.0;
  double w_bert = 2.0;
  double w_miou = 2.0;
  double w_format = 1.0;

  /// Throws Error(InvalidValue) on negative or all-zero weights.
  void check() const;
};

struct GrpoConfig {
  int group_size = 8;
  double clip_epsilon = 0.2;
  double std_floor = 1e-8;
  double max_ratio = 1e4;

  void check() const;
};

}  // namespace inkeval
