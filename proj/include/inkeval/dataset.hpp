#pragma once

// Benchmark construction: label scaling, synthetic label ingestion, class
// balancing, multi-turn CoT construction, expert review and manifest I/O.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inkeval/core.hpp"
#include "inkeval/gateway.hpp"
#include "inkeval/serialization.hpp"

namespace inkeval {

enum class ScrollType { HangingScroll, SquareFormat, Handscroll };

std::string_view to_string(ScrollType t);
std::optional<ScrollType> scroll_type_from_string(std::string_view text);

/// h/w >= 1.5 is a hanging scroll, h/w <= 2/3 a handscroll, anything between
/// square. Throws NonPositiveDimensions.
ScrollType classify_scroll_type(int width, int height);

struct Valuation {
  std::string id;
  double amount = 0.0;
};

struct Label {
  std::string id;
  Score score;

  bool operator==(const Label&) const = default;
};

/// Tier by the fraction p of items strictly more valuable (average rank for
/// equal amounts): p < 0.10 gives 5, p < 0.60 gives 4, otherwise 3. Output
/// keeps the input order. Throws NonPositiveValuation or EmptyInput.
std::vector<Label> scale_auction_labels(std::span<const Valuation> valuations);

struct SyntheticAssignment {
  std::string id;
  int level = 0;  // 0..3
};

/// Drops ids in `rejected`; the level becomes the score. Throws LabelOutOfRange.
std::vector<Label> ingest_synthetic_labels(std::span<const SyntheticAssignment> assignments,
                                           const std::set<std::string>& rejected);

enum class Split { Train, Test };

std::string_view to_string(Split s);
std::optional<Split> split_from_string(std::string_view text);

inline constexpr std::string_view kManifestSchema = "inkeval.manifest/1";

struct Manifest {
  std::vector<PaintingRecord> records;
  Split split = Split::Train;
  std::string schema_version = std::string(kManifestSchema);

  bool operator==(const Manifest&) const = default;
};

/// Throws ValidationFailure naming the first broken record (duplicate id or
/// validate_record failure).
void check_manifest(const Manifest& manifest);

/// Keeps at most floor(tolerance * smallest class count) records per score
/// class, chosen by a seeded hash of the id; survivors keep their order.
/// Infinite tolerance, or one already met, returns the manifest unchanged.
Manifest balance_manifest(const Manifest& manifest, double tolerance, std::uint64_t seed = 0);

/// Manifest line for one record, in the fixed field order.
Json record_to_json(const PaintingRecord& record);
/// Throws SchemaMismatch for structural problems and ValidationFailure for
/// invalid values, naming the offending field path.
PaintingRecord record_from_json(const Json& j);

/// Header line followed by one line per record.
std::string emit_manifest_string(const Manifest& manifest);
Manifest parse_manifest(std::string_view text);

/// Throws IoFailure when the file cannot be written or read.
void emit_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest load_manifest(const std::filesystem::path& path);

/// A labeled image waiting for its chain of thought.
struct LabeledImage {
  std::string id;
  std::string image_ref;
  int width = 0;
  int height = 0;
  Provenance provenance = Provenance::Synthetic;
  std::optional<double> raw_valuation;
  Score score{0};
};

struct CotSettings {
  std::string model_id;
  double temperature = 0.0;
};

struct CotResult {
  std::optional<ExpertResponse> response;  // parse-complete transcript, even when flagged
  bool flagged = false;
  std::string reason;                      // why it was flagged
  std::string transcript;
};

/// Runs the five dialogue rounds under a pre-conditioning system message and
/// parses the assembled transcript. An inconsistent score re-issues round 5
/// once; if it stays inconsistent the result is flagged. Gateway failures
/// surface as ConstructorUnavailable.
CotResult build_cot(const LabeledImage& item, ChatClient& constructor,
                    const CotSettings& settings = {});

/// Joins round replies, prefixing the section marker for rounds whose reply
/// does not already carry it.
std::string assemble_transcript(std::span<const std::string> replies);

/// T2I prompts from the prompt-generation template.
std::vector<std::string> generate_t2i_prompts(ChatClient& constructor,
                                              const CotSettings& settings = {});

enum class ReviewVerdict { Approved, Rejected };

struct ExpertReview {
  std::string id;
  ReviewVerdict verdict = ReviewVerdict::Approved;
};

/// Approved records become validated, rejected ones are removed; records
/// without a review are untouched.
Manifest apply_expert_reviews(const Manifest& manifest, std::span<const ExpertReview> reviews);

/// Rows of a small RFC 4180 CSV file (quoted fields, doubled quotes).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// CSV with a header row, as maps from column name to value.
std::vector<std::vector<std::pair<std::string, std::string>>> read_csv_records(
    std::string_view text);

}  // namespace inkeval
