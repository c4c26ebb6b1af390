#include "inkeval/mocks.hpp"

#include <array>
#include <sstream>

#include "inkeval/hashing.hpp"
#include "inkeval/parser.hpp"
#include "inkeval/prompts.hpp"
#include "inkeval/serialization.hpp"

namespace inkeval::mocks {
namespace {

// splitmix64 step, for cheap deterministic variety.
std::uint64_t mix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& table, std::uint64_t& state) {
  return table[mix(state) % N];
}

constexpr std::array<std::string_view, 4> kSubjects = {"远山叠嶂", "孤舟寒江", "折枝梅花",
                                                       "高士抚琴"};
constexpr std::array<std::string_view, 3> kLayouts = {"构图上实下虚，留白开阔",
                                                      "近中远三景层层推进",
                                                      "主体偏居一隅，疏密有致"};
constexpr std::array<std::string_view, 3> kStyles = {"文人写意", "工笔重彩", "小写意"};
constexpr std::array<std::string_view, 4> kRegionLabels = {"主峰", "点景人物", "枝干", "水口"};
constexpr std::array<std::string_view, 3> kRegionNotes = {
    "笔线顿挫有力，是画面的视觉中心", "墨色浓淡相生，层次分明", "以留白衬托气势，虚实相映"};
constexpr std::array<std::string_view, 3> kBrush = {"用笔沉着，线条具书写性", "墨分五色，干湿并用",
                                                    "皴擦略显板滞，变化不足"};
constexpr std::array<std::string_view, 3> kSpirit = {"气脉贯通，动势自然", "节奏平缓，气息略闷",
                                                     "开合有度，画面有呼吸感"};
constexpr std::array<std::string_view, 3> kConception = {"意境清远，耐人寻味", "意境初成，联想空间有限",
                                                         "诗意空间开阔，情感含蓄"};

std::string last_user_text(const ChatRequest& r) {
  for (auto it = r.messages.rbegin(); it != r.messages.rend(); ++it) {
    if (it->role == "user") return it->text;
  }
  return {};
}

std::optional<std::string> last_image(const ChatRequest& r) {
  for (auto it = r.messages.rbegin(); it != r.messages.rend(); ++it) {
    if (it->image_ref) return it->image_ref;
  }
  return std::nullopt;
}

std::string roi_json(const ExpertResponse& r, int width, int height) {
  Json block;
  block["height"] = height;
  block["width"] = width;
  block["num_regions"] = r.rois.size();
  Json list = Json::array();
  for (const auto& roi : r.rois) list.push_back(to_json(roi));
  block["regions_of_interest"] = std::move(list);
  return block.dump(2);
}

}  // namespace

ExpertResponse synthetic_response(std::uint64_t seed, Score score) {
  std::uint64_t st = seed;
  const MajorTheme major = kMajorThemes[mix(st) % kMajorThemes.size()];
  const auto subs = sub_categories(major);
  Theme theme(major, std::string(subs[mix(st) % subs.size()].canonical));

  std::string caption = "画面以" + std::string(pick(kSubjects, st)) + "为主体，" +
                        std::string(pick(kLayouts, st)) + "，呈现" + std::string(pick(kStyles, st)) +
                        "风格。";
  std::vector<RoiRegion> rois;
  const int count = 1 + static_cast<int>(mix(st) % 4);
  for (int k = 0; k < count; ++k) {
    const double x0 = static_cast<double>(mix(st) % 50) / 100.0;
    const double y0 = static_cast<double>(mix(st) % 50) / 100.0;
    const double w = 0.1 + static_cast<double>(mix(st) % 40) / 100.0;
    const double h = 0.1 + static_cast<double>(mix(st) % 40) / 100.0;
    rois.push_back(RoiRegion{std::string(pick(kRegionLabels, st)),
                             std::string(pick(kRegionNotes, st)),
                             BoundingBox(x0, y0, x0 + w, y0 + h)});
  }
  std::string theme_eval = "就" + std::string(chinese_name(major)) + "画的标准而言，" +
                           std::string(pick(kLayouts, st)) + "，" + std::string(pick(kBrush, st)) +
                           "。";
  TierEvaluation tiers{std::string(pick(kBrush, st)) + "。", std::string(pick(kSpirit, st)) + "。",
                       std::string(pick(kConception, st)) + "。"};
  return ExpertResponse{std::move(caption), std::move(theme),      std::move(rois),
                        std::move(theme_eval), std::move(tiers), score, ""};
}

std::string placeholder_image(const GenerationRequest& request) {
  int w = 48, h = 48;
  switch (request.aspect) {
    case Aspect::Hanging: w = 32, h = 64; break;
    case Aspect::Handscroll: w = 64, h = 24; break;
    case Aspect::Square: w = 48, h = 48; break;
    case Aspect::Free: w = 40, h = 40; break;
  }
  const std::int64_t seed = request.seed.value_or(0);
  std::ostringstream os;
  os << "P5\n# mock seed=" << seed << " prompt=" << sha256_hex(request.prompt).substr(0, 16)
     << "\n"
     << w << ' ' << h << "\n255\n";
  std::uint64_t st = fnv1a64(static_cast<std::uint64_t>(seed), request.prompt);
  std::string out = os.str();
  for (int i = 0; i < w * h; ++i) out.push_back(static_cast<char>(mix(st) & 0xFF));
  return out;
}

std::optional<PlaceholderInfo> read_placeholder(std::string_view bytes) {
  if (!bytes.starts_with("P5\n# mock seed=")) return std::nullopt;
  std::istringstream in{std::string(bytes.substr(0, 256))};
  std::string magic, comment, seed_field;
  std::getline(in, magic);
  std::getline(in, comment);
  PlaceholderInfo info;
  try {
    const auto pos = comment.find("seed=");
    info.seed = std::stoll(comment.substr(pos + 5));
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (!(in >> info.width >> info.height)) return std::nullopt;
  return info;
}

std::shared_ptr<MockChatBackend> MockChatBackend::canned(std::string reply) {
  return std::make_shared<MockChatBackend>([reply = std::move(reply)](const ChatRequest&) {
    return reply;
  });
}

MockChatBackend::Handler evaluator(std::shared_ptr<const ContentStore> store, VerdictScript script) {
  return [store = std::move(store), script = std::move(script)](const ChatRequest& request) {
    const auto ref = last_image(request);
    if (!ref) throw Error(ErrorKind::RequestRejected, "mock evaluator: request carries no image");
    const auto info = read_placeholder(store->get(*ref));
    if (!info) throw Error(ErrorKind::RequestRejected, "mock evaluator: not a placeholder image");
    const MockVerdict verdict = script(info->seed);
    const bool retried = last_user_text(request).find(prompts::score_format_reminder()) !=
                         std::string::npos;
    const bool scoreless = !verdict.score || (verdict.recover_on_retry && !retried);
    const auto resp = synthetic_response(static_cast<std::uint64_t>(info->seed),
                                         Score(verdict.score.value_or(0)));
    std::string text = render_expert_response(resp, Language::Chinese, info->width, info->height);
    if (scoreless) {
      // Drop the score line; the analysis reads as if the model stopped short.
      text = text.substr(0, text.rfind("最终分数")) + "综合以上分析，这幅作品值得进一步品评。\n";
    }
    return text;
  };
}

MockChatBackend::Handler scripted_evaluator(std::shared_ptr<const ContentStore> store,
                                            std::int64_t base_seed,
                                            std::vector<std::optional<int>> scores) {
  return evaluator(std::move(store), [base_seed, scores = std::move(scores)](std::int64_t seed) {
    const std::int64_t i = seed - base_seed;
    if (i < 0 || i >= static_cast<std::int64_t>(scores.size())) return MockVerdict{};
    return MockVerdict{scores[static_cast<std::size_t>(i)], false};
  });
}

MockChatBackend::Handler constructor(ConstructorScript script) {
  return [script](const ChatRequest& request) -> std::string {
    const std::string user = last_user_text(request);
    if (user == prompts::t2i_prompt_generation()) {
      std::string out;
      for (int i = 1; i <= prompts::kT2iPromptCount; ++i) {
        std::uint64_t st = static_cast<std::uint64_t>(i);
        out += "[Prompt" + std::to_string(i) + "]: 一幅" + std::string(pick(kStyles, st)) +
               "中国画，" + std::string(pick(kSubjects, st)) + "，" + std::string(pick(kLayouts, st)) +
               "，" + std::string(pick(kConception, st)) + "。\n\n";
      }
      return out;
    }
    std::optional<prompts::Preconditioning> pre;
    int round = 0;
    for (const auto& m : request.messages) {
      if (m.role == "system" && !pre) pre = prompts::parse_preconditioning(m.text);
      if (m.role == "user") ++round;
    }
    if (!pre) throw Error(ErrorKind::RequestRejected, "mock constructor: no pre-conditioning");
    const auto ref = last_image(request).value_or("");
    const auto resp = synthetic_response(fnv1a64(0, ref), pre->score);
    switch (round) {
      case 1:
        return "画面描述: " + resp.caption + "\n题材: " + theme_statement(resp.theme, Language::Chinese);
      case 2:
        return roi_json(resp, 1000, 1000);
      case 3:
        return resp.theme_eval;
      case 4:
        return "笔墨分析: " + resp.tier_eval.brush_ink + "\n气韵分析: " +
               resp.tier_eval.spirit_resonance + "\n意境分析: " + resp.tier_eval.artistic_conception;
      case 5: {
        const bool retried = user.find(prompts::round5_retry_note()) != std::string::npos;
        const bool wrong = script.wrong_round5 < 0 || (script.wrong_round5 > 0 && !retried) ||
                           (script.wrong_round5 > 1);
        const int value = pre->score.value();
        return "最终分数: " + std::to_string(wrong ? (value + 1) % (kMaxScore + 1) : value);
      }
      default:
        throw Error(ErrorKind::RequestRejected, "mock constructor: unexpected round " +
                                                    std::to_string(round));
    }
  };
}

}  // namespace inkeval::mocks
