#include "inkeval/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "inkeval/error.hpp"
#include "inkeval/hashing.hpp"
#include "inkeval/parser.hpp"
#include "inkeval/prompts.hpp"
#include "inkeval/text.hpp"

namespace inkeval {

std::string_view to_string(ScrollType t) {
  switch (t) {
    case ScrollType::HangingScroll: return "hanging_scroll";
    case ScrollType::SquareFormat: return "square_format";
    case ScrollType::Handscroll: return "handscroll";
  }
  return "square_format";
}

std::optional<ScrollType> scroll_type_from_string(std::string_view text) {
  for (auto t : {ScrollType::HangingScroll, ScrollType::SquareFormat, ScrollType::Handscroll}) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

ScrollType classify_scroll_type(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::NonPositiveDimensions,
                "dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  // Integer comparisons avoid rounding at the exact boundaries.
  const long long w = width, h = height;
  if (2 * h >= 3 * w) return ScrollType::HangingScroll;
  if (3 * h <= 2 * w) return ScrollType::Handscroll;
  return ScrollType::SquareFormat;
}

std::vector<Label> scale_auction_labels(std::span<const Valuation> valuations) {
  if (valuations.empty()) throw Error(ErrorKind::EmptyInput, "no valuations");
  for (const auto& v : valuations) {
    if (!std::isfinite(v.amount) || v.amount <= 0.0) {
      throw Error(ErrorKind::NonPositiveValuation, "valuation of '" + v.id + "' is not positive");
    }
  }
  const std::size_t n = valuations.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return valuations[a].amount > valuations[b].amount;
  });
  std::vector<Label> out;
  out.reserve(n);
  for (const auto& v : valuations) out.push_back(Label{v.id, Score(3)});
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && valuations[order[j + 1]].amount == valuations[order[i]].amount) ++j;
    // Average rank of the tie group, 0-based, is i + (k-1)/2 for k tied items,
    // so p = (2i + k - 1) / 2n. Compare in integers.
    const std::size_t k = j - i + 1;
    const std::size_t twice_rank = 2 * i + k - 1;
    int tier = 3;
    if (10 * twice_rank < 2 * n) {
      tier = 5;
    } else if (10 * twice_rank < 12 * n) {
      tier = 4;
    }
    for (std::size_t m = i; m <= j; ++m) out[order[m]].score = Score(tier);
    i = j + 1;
  }
  return out;
}

std::vector<Label> ingest_synthetic_labels(std::span<const SyntheticAssignment> assignments,
                                           const std::set<std::string>& rejected) {
  std::vector<Label> out;
  for (const auto& a : assignments) {
    if (a.level < 0 || a.level > 3) {
      throw Error(ErrorKind::LabelOutOfRange,
                  "synthetic label for '" + a.id + "' is " + std::to_string(a.level) +
                      ", expected 0..3");
    }
  }
  for (const auto& a : assignments) {
    if (rejected.contains(a.id)) continue;
    out.push_back(Label{a.id, Score(a.level)});
  }
  return out;
}

std::string_view to_string(Split s) { return s == Split::Train ? "train" : "test"; }

std::optional<Split> split_from_string(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "test") return Split::Test;
  return std::nullopt;
}

void check_manifest(const Manifest& m) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    const auto& r = m.records[i];
    if (!seen.insert(r.id).second) {
      throw Error(ErrorKind::ValidationFailure, "duplicate record id '" + r.id + "'");
    }
    const auto problems = validate_record(r);
    if (!problems.empty()) {
      throw Error(ErrorKind::ValidationFailure,
                  "record '" + r.id + "' (#" + std::to_string(i) + "): " + problems.front());
    }
  }
}

Manifest balance_manifest(const Manifest& m, double tolerance, std::uint64_t seed) {
  if (std::isnan(tolerance) || tolerance < 1.0) {
    throw Error(ErrorKind::InvalidValue, "balance tolerance must be >= 1");
  }
  std::map<int, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    classes[m.records[i].gt.final_score.value()].push_back(i);
  }
  if (classes.empty() || std::isinf(tolerance)) return m;
  std::size_t smallest = m.records.size();
  for (const auto& [score, idx] : classes) smallest = std::min(smallest, idx.size());
  const double cap_real = std::floor(tolerance * static_cast<double>(smallest));
  const auto cap = static_cast<std::size_t>(cap_real);

  std::vector<bool> keep(m.records.size(), true);
  for (auto& [score, idx] : classes) {
    if (idx.size() <= cap) continue;
    std::vector<std::size_t> ranked = idx;
    std::sort(ranked.begin(), ranked.end(), [&](auto a, auto b) {
      const auto ha = fnv1a64(seed, m.records[a].id);
      const auto hb = fnv1a64(seed, m.records[b].id);
      return ha != hb ? ha < hb : m.records[a].id < m.records[b].id;
    });
    for (std::size_t k = cap; k < ranked.size(); ++k) keep[ranked[k]] = false;
  }
  Manifest out;
  out.split = m.split;
  out.schema_version = m.schema_version;
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    if (keep[i]) out.records.push_back(m.records[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

Json record_to_json(const PaintingRecord& r) {
  Json j;
  j["id"] = r.id;
  j["image_ref"] = r.image_ref;
  j["width"] = r.width;
  j["height"] = r.height;
  j["provenance"] = std::string(to_string(r.provenance));
  j["raw_valuation"] = r.raw_valuation ? Json(*r.raw_valuation) : Json(nullptr);
  j["theme_major"] = std::string(id_name(r.gt.theme.major()));
  j["theme_sub"] = r.gt.theme.sub() ? Json(*r.gt.theme.sub()) : Json(nullptr);
  j["scroll_type"] = (r.width > 0 && r.height > 0)
                         ? Json(std::string(to_string(classify_scroll_type(r.width, r.height))))
                         : Json(nullptr);
  j["gt_score"] = r.gt.final_score.value();
  j["gt_cot"] = to_json(r.gt);
  j["validated"] = r.validated;
  return j;
}

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::SchemaMismatch, std::string("manifest record: missing field '") + key + "'");
  }
  return j.at(key);
}

template <typename T>
T typed(const Json& j, const char* key) {
  const Json& v = field(j, key);
  try {
    return v.get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorKind::SchemaMismatch,
                std::string("manifest record: field '") + key + "' has the wrong type");
  }
}

// Box violations inside gt_cot, reported with their field path.
void check_boxes(const Json& cot) {
  if (!cot.is_object() || !cot.contains("rois") || !cot.at("rois").is_array()) return;
  const auto& rois = cot.at("rois");
  for (std::size_t i = 0; i < rois.size(); ++i) {
    const auto& roi = rois[i];
    if (!roi.is_object() || !roi.contains("bounding_box")) continue;
    const auto& b = roi.at("bounding_box");
    auto num = [&](const char* k) {
      return b.contains(k) && b.at(k).is_number() ? b.at(k).get<double>() : std::nan("");
    };
    const auto problems =
        BoundingBox::violations(num("x_min"), num("y_min"), num("x_max"), num("y_max"));
    if (!problems.empty()) {
      throw Error(ErrorKind::ValidationFailure, "gt_cot.rois[" + std::to_string(i) +
                                                    "].bounding_box: " + problems.front());
    }
  }
}

}  // namespace

PaintingRecord record_from_json(const Json& j) {
  const auto id = typed<std::string>(j, "id");
  const std::string where = "record '" + id + "': ";
  const auto prov = provenance_from_string(typed<std::string>(j, "provenance"));
  if (!prov) throw Error(ErrorKind::ValidationFailure, where + "provenance: unknown value");

  const Json& cot = field(j, "gt_cot");
  check_boxes(cot);
  std::optional<ExpertResponse> gt;
  try {
    gt = expert_response_from_json(cot);
  } catch (const Error& e) {
    const auto kind = e.kind() == ErrorKind::SchemaMismatch ? ErrorKind::SchemaMismatch
                                                            : ErrorKind::ValidationFailure;
    throw Error(kind, where + "gt_cot: " + e.detail());
  }
  PaintingRecord r{id,
                   typed<std::string>(j, "image_ref"),
                   typed<int>(j, "width"),
                   typed<int>(j, "height"),
                   *prov,
                   std::nullopt,
                   std::move(*gt),
                   typed<bool>(j, "validated")};
  if (!field(j, "raw_valuation").is_null()) r.raw_valuation = typed<double>(j, "raw_valuation");

  if (typed<int>(j, "gt_score") != r.gt.final_score.value()) {
    throw Error(ErrorKind::ValidationFailure, where + "gt_score: disagrees with gt_cot.final_score");
  }
  if (typed<std::string>(j, "theme_major") != id_name(r.gt.theme.major())) {
    throw Error(ErrorKind::ValidationFailure, where + "theme_major: disagrees with gt_cot.theme");
  }
  const Json& sub = field(j, "theme_sub");
  const bool sub_ok = sub.is_null() ? !r.gt.theme.sub()
                                    : (sub.is_string() && r.gt.theme.sub() &&
                                       sub.get<std::string>() == *r.gt.theme.sub());
  if (!sub_ok) throw Error(ErrorKind::ValidationFailure, where + "theme_sub: disagrees with gt_cot.theme");
  const Json& scroll = field(j, "scroll_type");
  if (r.width > 0 && r.height > 0) {
    if (!scroll.is_string() || scroll.get<std::string>() !=
                                   to_string(classify_scroll_type(r.width, r.height))) {
      throw Error(ErrorKind::ValidationFailure, where + "scroll_type: disagrees with width/height");
    }
  }
  const auto problems = validate_record(r);
  if (!problems.empty()) throw Error(ErrorKind::ValidationFailure, where + problems.front());
  return r;
}

std::string emit_manifest_string(const Manifest& m) {
  check_manifest(m);
  Json header;
  header["manifest"] = Json{{"schema_version", m.schema_version},
                            {"split", std::string(to_string(m.split))},
                            {"count", m.records.size()}};
  std::string out = dump_line(header);
  for (const auto& r : m.records) out += dump_line(record_to_json(r));
  return out;
}

Manifest parse_manifest(std::string_view text) {
  Manifest m;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t expected = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::MalformedJson,
                  "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!have_header) {
      if (!j.is_object() || !j.contains("manifest")) {
        throw Error(ErrorKind::SchemaMismatch, "manifest line 1: missing header");
      }
      const Json& h = j.at("manifest");
      const std::string version = h.value("schema_version", "");
      if (version != kManifestSchema) {
        throw Error(ErrorKind::SchemaVersionMismatch,
                    "manifest schema_version '" + version + "', expected '" +
                        std::string(kManifestSchema) + "'");
      }
      const auto split = split_from_string(h.value("split", ""));
      if (!split) throw Error(ErrorKind::SchemaMismatch, "manifest header: unknown split");
      m.split = *split;
      m.schema_version = version;
      expected = h.value("count", std::size_t{0});
      have_header = true;
      continue;
    }
    try {
      m.records.push_back(record_from_json(j));
    } catch (const Error& e) {
      throw Error(e.kind(), "manifest line " + std::to_string(line_no) + ": " + e.detail());
    }
  }
  if (!have_header) throw Error(ErrorKind::SchemaMismatch, "manifest is empty");
  if (expected != m.records.size()) {
    throw Error(ErrorKind::ValidationFailure, "manifest header count " + std::to_string(expected) +
                                                  " but " + std::to_string(m.records.size()) +
                                                  " records");
  }
  check_manifest(m);
  return m;
}

void emit_manifest(const Manifest& m, const std::filesystem::path& path) {
  const std::string text = emit_manifest_string(m);
  try {
    write_file_atomic(path, text);
  } catch (const std::filesystem::filesystem_error& e) {
    throw Error(ErrorKind::IoFailure, e.what());
  }
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot read manifest " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

// ---------------------------------------------------------------------------

std::string assemble_transcript(std::span<const std::string> replies) {
  std::string out;
  for (std::size_t i = 0; i < replies.size(); ++i) {
    const std::string_view marker = prompts::round_marker(static_cast<int>(i) + 1);
    const std::string body(text::trim(replies[i]));
    if (!out.empty()) out += "\n\n";
    if (!marker.empty()) {
      const std::string_view part = i + 1 == 2 ? "rois" : "theme_eval";
      const auto seg = segment_sections(body);
      const bool has_marker = std::any_of(seg.sections.begin(), seg.sections.end(),
                                          [&](const auto& s) { return s.name == part; });
      if (!has_marker) {
        out += std::string(marker) + ":\n";
      }
    }
    out += body;
  }
  out += "\n";
  return out;
}

namespace {

struct Consistency {
  bool ok = false;
  std::string reason;
};

Consistency check_transcript(const ParseReport& report, Score expected) {
  if (!report.complete) {
    std::string missing;
    for (const auto& p : report.missing_parts) missing += (missing.empty() ? "" : ",") + p;
    return {false, "incomplete transcript (missing " + missing + ")"};
  }
  if (report.response->final_score != expected) {
    return {false, "ScoreInconsistent: transcript scores " +
                       std::to_string(report.response->final_score.value()) + ", label is " +
                       std::to_string(expected.value())};
  }
  return {true, ""};
}

}  // namespace

CotResult build_cot(const LabeledImage& item, ChatClient& constructor, const CotSettings& settings) {
  ChatRequest req;
  req.model_id = settings.model_id;
  req.temperature = settings.temperature;
  req.messages.push_back(ChatMessage{"system", prompts::preconditioning(item.score, item.provenance),
                                     std::nullopt});
  std::vector<std::string> replies;
  auto ask = [&](ChatRequest& r) {
    try {
      return constructor.chat(r);
    } catch (const Error& e) {
      if (is_external(e.kind())) {
        throw Error(ErrorKind::ConstructorUnavailable,
                    "CoT for '" + item.id + "': " + std::string(to_string(e.kind())) + ": " +
                        e.detail());
      }
      throw;
    }
  };

  for (int round = 1; round <= prompts::kCotRounds; ++round) {
    std::optional<std::string> image;
    if (round == 1) image = item.image_ref;
    req.messages.push_back(
        ChatMessage{"user", prompts::cot_round(round, item.width, item.height), image});
    std::string reply = ask(req);
    req.messages.push_back(ChatMessage{"assistant", reply, std::nullopt});
    replies.push_back(std::move(reply));
  }

  CotResult out;
  out.transcript = assemble_transcript(replies);
  ParseReport report = parse_expert_response(out.transcript, item.width, item.height);
  Consistency verdict = check_transcript(report, item.score);
  if (!verdict.ok) {
    spdlog::info("build_cot: '{}' re-issuing round 5 ({})", item.id, verdict.reason);
    req.messages.pop_back();  // assistant round-5 reply
    req.messages.back().text += prompts::round5_retry_note();
    replies.back() = ask(req);
    out.transcript = assemble_transcript(replies);
    report = parse_expert_response(out.transcript, item.width, item.height);
    verdict = check_transcript(report, item.score);
  }
  out.response = std::move(report.response);
  if (!verdict.ok) {
    out.flagged = true;
    out.reason = verdict.reason;
    spdlog::warn("build_cot: '{}' flagged for manual review: {}", item.id, out.reason);
  }
  return out;
}

std::vector<std::string> generate_t2i_prompts(ChatClient& constructor, const CotSettings& settings) {
  ChatRequest req;
  req.model_id = settings.model_id;
  req.temperature = settings.temperature;
  req.messages.push_back(
      ChatMessage{"user", std::string(prompts::t2i_prompt_generation()), std::nullopt});
  auto out = prompts::parse_t2i_prompts(constructor.chat(req));
  if (out.empty()) throw Error(ErrorKind::ResponseEmpty, "no [PromptN] entries in the reply");
  return out;
}

Manifest apply_expert_reviews(const Manifest& m, std::span<const ExpertReview> reviews) {
  std::map<std::string, ReviewVerdict> by_id;
  for (const auto& r : reviews) by_id[r.id] = r.verdict;
  Manifest out;
  out.split = m.split;
  out.schema_version = m.schema_version;
  for (const auto& rec : m.records) {
    const auto it = by_id.find(rec.id);
    if (it == by_id.end()) {
      out.records.push_back(rec);
    } else if (it->second == ReviewVerdict::Approved) {
      out.records.push_back(rec);
      out.records.back().validated = true;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false, any = false;
  auto end_row = [&] {
    row.push_back(std::move(cell));
    cell.clear();
    const bool blank = row.size() == 1 && row.front().empty();
    if (!blank) rows.push_back(std::move(row));
    row.clear();
    any = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
      continue;
    }
    any = true;
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n') {
      end_row();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  if (quoted) throw Error(ErrorKind::SchemaMismatch, "CSV: unterminated quoted field");
  if (any || !cell.empty() || !row.empty()) end_row();
  return rows;
}

std::vector<std::vector<std::pair<std::string, std::string>>> read_csv_records(
    std::string_view text) {
  const auto rows = parse_csv(text);
  std::vector<std::vector<std::pair<std::string, std::string>>> out;
  if (rows.empty()) return out;
  const auto& header = rows.front();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw Error(ErrorKind::SchemaMismatch, "CSV row " + std::to_string(r + 1) + " has " +
                                                 std::to_string(rows[r].size()) + " fields, header has " +
                                                 std::to_string(header.size()));
    }
    std::vector<std::pair<std::string, std::string>> rec;
    for (std::size_t c = 0; c < header.size(); ++c) {
      rec.emplace_back(std::string(text::trim(header[c])), rows[r][c]);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace inkeval
