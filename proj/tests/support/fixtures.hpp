#pragma once

// Small manifests and response files built from the deterministic mocks.

#include <string>

#include "inkeval/dataset.hpp"
#include "inkeval/mocks.hpp"
#include "inkeval/parser.hpp"
#include "inkeval/serialization.hpp"

namespace fixture {

inline inkeval::PaintingRecord record(int i, int score) {
  using namespace inkeval;
  const bool authentic = score >= 4 || (score == 3 && i % 2 == 0);
  PaintingRecord r{"p" + std::to_string(1000 + i),
                   "images/p" + std::to_string(i) + ".jpg",
                   1000,
                   800 + 10 * (i % 7),
                   authentic ? Provenance::Authentic : Provenance::Synthetic,
                   std::nullopt,
                   mocks::synthetic_response(static_cast<std::uint64_t>(i), Score(score)),
                   i % 3 == 0};
  if (authentic) r.raw_valuation = 1000.0 * (i + 1) + 0.25;
  return r;
}

inline inkeval::Manifest manifest(int n, inkeval::Split split = inkeval::Split::Test) {
  inkeval::Manifest m;
  m.split = split;
  for (int i = 0; i < n; ++i) m.records.push_back(record(i, i % 6));
  return m;
}

// One {"id","response"} line per record. Every third prediction is a
// different mock response with a shifted score, every seventh is missing its
// score line.
inline std::string predictions(const inkeval::Manifest& m) {
  using namespace inkeval;
  std::string out;
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    const auto& rec = m.records[i];
    ExpertResponse resp = rec.gt;
    if (i % 3 == 1) {
      resp = mocks::synthetic_response(i * 31 + 5,
                                       Score((rec.gt.final_score.value() + 1) % (kMaxScore + 1)));
    }
    std::string text = render_expert_response(resp, Language::Chinese, rec.width, rec.height);
    if (i % 7 == 6) text = text.substr(0, text.rfind("最终分数"));
    out += dump_line(Json{{"id", rec.id}, {"response", text}});
  }
  return out;
}

}  // namespace fixture
