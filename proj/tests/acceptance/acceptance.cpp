// One PASS/FAIL line per acceptance criterion, with its runtime budget.
// Exits non-zero if any criterion fails or runs over budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <spdlog/spdlog.h>

#include "fixtures.hpp"
#include "generators.hpp"
#include "inkeval/bon.hpp"
#include "inkeval/commands.hpp"
#include "inkeval/dataset.hpp"
#include "inkeval/error.hpp"
#include "inkeval/grpo.hpp"
#include "inkeval/metrics.hpp"
#include "inkeval/mocks.hpp"
#include "inkeval/parser.hpp"
#include "inkeval/reward.hpp"
#include "oracles.hpp"

using namespace inkeval;
namespace fs = std::filesystem;

namespace {

// Collects the first few problems of a check.
struct Probe {
  std::vector<std::string> problems;
  long checks = 0;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok && problems.size() < 5) problems.push_back(what);
  }
  bool ok() const { return problems.empty(); }
};

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() /
                     ("inkeval_acceptance_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

oracle::Box obox(const BoundingBox& b) { return {b.x_min(), b.y_min(), b.x_max(), b.y_max()}; }

// ---------------------------------------------------------------------------

void reward_suite(Probe& p) {
  for (int pred = 0; pred <= 5; ++pred) {
    for (int gt = 0; gt <= 5; ++gt) {
      p.expect(accuracy_reward(Score(pred), Score(gt)) == oracle::accuracy(pred, gt),
               "accuracy(" + std::to_string(pred) + "," + std::to_string(gt) + ")");
    }
  }
  std::mt19937_64 rng(101);
  TokenF1Scorer scorer;
  const RewardWeights w{10, 2, 2, 1};
  for (int t = 0; t < 10000; ++t) {
    const auto lang = rng() % 2 ? Language::English : Language::Chinese;
    const auto gold = gen::response(rng, lang, static_cast<int>(rng() % 6), 1 + static_cast<int>(rng() % 4));
    const auto cand = gen::response(rng, lang, static_cast<int>(rng() % 6), static_cast<int>(rng() % 7));
    std::string text = render_expert_response(cand, lang);
    switch (rng() % 4) {
      case 0: text = text.substr(0, rng() % (text.size() + 1)); break;  // truncated, maybe mid code point
      case 1: text = text.substr(text.size() / 3); break;
      default: break;
    }
    const auto b = final_reward(parse_expert_response(text), gold, w, scorer);
    const bool ranges = b.r_acc >= 0 && b.r_acc <= 1 && b.r_bert >= 0 && b.r_bert <= 1 &&
                        b.r_miou >= 0 && b.r_miou <= 2 && (b.r_format == 0 || b.r_format == 1) &&
                        b.final >= 0 && b.final <= 17 + 1e-12;
    p.expect(ranges, "component out of range at case " + std::to_string(t));
    const double hand = 10 * b.r_acc + 2 * b.r_bert + 2 * b.r_miou + 1 * b.r_format;
    p.expect(std::abs(b.final - hand) <= 1e-12, "weighted sum differs by " + num(b.final - hand));
  }
}

void iou_suite(Probe& p) {
  std::mt19937_64 rng(202);
  TokenF1Scorer scorer;
  for (int t = 0; t < 1000; ++t) {
    std::vector<RoiRegion> pred, gt;
    std::vector<oracle::Box> pb, gb;
    const int np = static_cast<int>(rng() % 5), ng = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < np; ++i) {
      pred.push_back({"p", gen::sentence(rng, Language::Chinese), gen::box(rng)});
      pb.push_back(obox(pred.back().box));
    }
    for (int j = 0; j < ng; ++j) {
      gt.push_back({"g", gen::sentence(rng, Language::Chinese), gen::box(rng)});
      gb.push_back(obox(gt.back().box));
    }
    const auto want = oracle::match(pb, gb);
    p.expect(match_boxes(pred, gt) == want, "matching differs at instance " + std::to_string(t));
    double sum = 0;
    for (auto [i, j] : want) {
      sum += oracle::iou(pb[i], gb[j]) + token_f1(pred[i].description, gt[j].description);
    }
    const double expect = np ? sum / np : 0.0;
    const double got = miou_reward(pred, gt, scorer).value;
    p.expect(std::abs(got - expect) <= 1e-12, "miou " + num(got) + " vs " + num(expect));
  }
}

double surrogate_of(const std::vector<double>& rewards, const std::vector<double>& ratios, double eps) {
  std::vector<GroupSample> s;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    s.push_back({"", rewards[i], std::log(ratios[i]) - 3.0, -3.0});
  }
  GrpoConfig c;
  c.clip_epsilon = eps;
  return clipped_surrogate(s, c);
}

void grpo_suite(Probe& p) {
  std::mt19937_64 rng(303);
  std::normal_distribution<double> normal(0, 4);
  for (int t = 0; t < 10000; ++t) {
    std::vector<double> r(2 + rng() % 15);
    for (double& x : r) x = normal(rng);
    const auto a = group_advantages(r);
    double mean = 0, var = 0;
    for (double x : a) mean += x;
    mean /= static_cast<double>(a.size());
    for (double x : a) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(a.size()));
    p.expect(std::abs(mean) < 1e-9, "advantage mean " + num(mean));
    p.expect(std::abs(sd - 1.0) < 1e-9, "advantage std " + num(sd));
  }
  for (double c : {0.0, 2.0, -7.5, 17.0}) {
    for (std::size_t n : {2u, 5u, 8u}) {
      const auto a = group_advantages(std::vector<double>(n, c));
      p.expect(std::all_of(a.begin(), a.end(), [](double x) { return x == 0.0; }),
               "zero-variance group gave nonzero advantages");
    }
  }
  std::uniform_real_distribution<double> ratio(0.3, 2.5), eps_d(0.05, 0.4);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> rewards(2 + rng() % 10), ratios(rewards.size());
    for (double& x : rewards) x = normal(rng);
    for (double& x : ratios) x = ratio(rng);
    const double eps = eps_d(rng);
    const double got = surrogate_of(rewards, ratios, eps);
    const double want = oracle::surrogate(rewards, ratios, eps);
    p.expect(std::abs(got - want) <= 1e-10, "surrogate " + num(got) + " vs " + num(want));
  }
  const double worked = surrogate_of({0, 1}, {1, 2}, 0.2);
  p.expect(std::abs(worked - 0.1) <= 1e-10, "worked case gave " + num(worked));
}

void metric_suite(Probe& p) {
  std::mt19937_64 rng(404);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = 1 + rng() % 60;
    std::vector<int> pi, gi;
    std::vector<Score> ps, gs;
    for (std::size_t i = 0; i < n; ++i) {
      pi.push_back(static_cast<int>(rng() % 6));
      gi.push_back(static_cast<int>(rng() % 6));
      ps.emplace_back(pi.back());
      gs.emplace_back(gi.back());
    }
    const auto got = score_metrics(ps, gs);
    const auto want = oracle::score_metrics(pi, gi);
    p.expect(std::abs(got.mae - want.mae) <= 1e-12 && std::abs(got.rmse - want.rmse) <= 1e-12 &&
                 std::abs(got.accuracy - want.accuracy) <= 1e-12,
             "score metrics differ from closed form");
    p.expect(got.rmse >= got.mae, "rmse < mae");
  }
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = 2 + rng() % 49;
    std::vector<double> sa(n), sb(n);
    for (auto& x : sa) x = static_cast<double>(rng() % 1000);
    for (auto& x : sb) x = static_cast<double>(rng() % 1000);
    const auto ra = scores_to_ranking(sa), rb = scores_to_ranking(sb);
    const auto rc = rank_correlations(ra, rb);
    p.expect(std::abs(rc.kendall_tau - oracle::kendall(ra, rb)) <= 1e-12,
             "kendall differs from brute force at n=" + std::to_string(n));
    std::vector<double> rev(n);
    for (std::size_t i = 0; i < n; ++i) rev[i] = static_cast<double>(n + 1) - rb[i];
    const auto rr = rank_correlations(ra, rev);
    p.expect(std::abs(rr.kendall_tau + rc.kendall_tau) <= 1e-12 &&
                 std::abs(rr.spearman_rho + rc.spearman_rho) <= 1e-12,
             "reversal is not antisymmetric");
  }
  const auto small = rank_correlations(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2});
  p.expect(std::abs(small.kendall_tau - 1.0 / 3.0) <= 1e-12, "tau(123,132) = " + num(small.kendall_tau));
  p.expect(std::abs(small.spearman_rho - 0.5) <= 1e-12, "rho(123,132) = " + num(small.spearman_rho));
}

void parser_suite(Probe& p) {
  std::mt19937_64 rng(505);
  for (auto lang : {Language::Chinese, Language::English}) {
    for (int score = 0; score <= 5; ++score) {
      for (int rois = 0; rois <= 6; ++rois) {
        for (int rep = 0; rep < 20; ++rep) {
          const auto gold = gen::response(rng, lang, score, rois);
          const std::string text = render_expert_response(gold, lang);
          const auto report = parse_expert_response(text);
          p.expect(report.complete && report.response && *report.response == gold,
                   "generated gold did not round-trip (score " + std::to_string(score) + ", " +
                       std::to_string(rois) + " rois)");
          p.expect(reassemble(segment_sections(text)) == text, "segmentation lost bytes");
        }
      }
    }
  }
  for (const auto& e : fs::directory_iterator(fs::path(INKEVAL_TEST_DATA) / "responses")) {
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    p.expect(reassemble(segment_sections(ss.str())) == ss.str(),
             "segmentation lost bytes in " + e.path().filename().string());
  }
  const std::vector<std::string> pieces = {"最终分数: ", "Final rating: ", "最终分数：", "分析。",
                                           "text ", "\n", "0", "1", "2", "3", "4", "5", "**"};
  for (int t = 0; t < 5000; ++t) {
    std::string s;
    for (int k = 1 + static_cast<int>(rng() % 14); k > 0; --k) s += pieces[rng() % pieces.size()];
    const int want = oracle::last_score(s);
    int got = -1;
    try {
      got = extract_final_score(s).value();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ScoreOutOfRange) got = want > 5 ? want : -2;
      else got = -1;
    }
    p.expect(got == want, "last-score rule disagrees on: " + s);
  }
}

void label_suite(Probe& p) {
  std::mt19937_64 rng(606);
  std::vector<int> order(100);
  for (int i = 0; i < 100; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Valuation> v;
  for (int i = 0; i < 100; ++i) v.push_back({"a" + std::to_string(i), 500.0 + 37.0 * order[i]});
  std::map<int, int> counts;
  for (const auto& l : scale_auction_labels(v)) ++counts[l.score.value()];
  p.expect(counts[5] == 10 && counts[4] == 50 && counts[3] == 40,
           "tier counts " + std::to_string(counts[5]) + "/" + std::to_string(counts[4]) + "/" +
               std::to_string(counts[3]));
  std::lognormal_distribution<double> amount(9, 1.5);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng() % 80;
    std::vector<Valuation> vals, moved;
    std::vector<double> amounts;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = rng() % 6 == 0 && !amounts.empty() ? amounts[rng() % amounts.size()]
                                                          : std::max(1.0, std::round(amount(rng)));
      amounts.push_back(a);
      vals.push_back({"x" + std::to_string(i), a});
      moved.push_back({"x" + std::to_string(i), 3.0 * std::log(a) + 11.0});
    }
    const auto l1 = scale_auction_labels(vals), l2 = scale_auction_labels(moved);
    p.expect(l1 == l2, "labels changed under a rank-preserving transform");
    for (std::size_t i = 0; i < n; ++i) {
      p.expect(l1[i].score.value() == oracle::tier(amounts, i), "tier differs from counting oracle");
    }
  }
}

struct BonRig {
  std::shared_ptr<ContentStore> store;
  std::unique_ptr<ImageClient> t2i;
  ClientOptions options;

  explicit BonRig(const fs::path& dir) : store(std::make_shared<ContentStore>(dir)) {
    options.sleep = [](auto) {};
    t2i = std::make_unique<ImageClient>(std::make_shared<mocks::MockImageBackend>(), store, options);
  }

  BonRunRecord run(const std::string& prompt, std::int64_t base, std::vector<std::optional<int>> scores,
                   int jobs = 4) {
    ChatClient evaluator(std::make_shared<mocks::MockChatBackend>(
                             mocks::scripted_evaluator(store, base, scores)),
                         options);
    BonConfig c;
    c.n = static_cast<int>(scores.size());
    c.base_seed = base;
    c.t2i_model = "mock-t2i";
    c.evaluator.model_id = "mock-evaluator";
    c.jobs = jobs;
    return run_bon(prompt, c, *t2i, evaluator);
  }
};

void bon_suite(Probe& p) {
  const auto dir = scratch("bon");
  BonRig rig(dir);
  const auto rec = rig.run("溪山行旅", 0, {2, 3, 5, 1, 5, 0, 4, 3});
  p.expect(rec.n == 8 && rec.winner_index == std::optional<std::size_t>(2),
           "scripted run winner " + (rec.winner_index ? std::to_string(*rec.winner_index) : "none"));

  std::mt19937_64 rng(707);
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + static_cast<int>(rng() % 8);
    // a random strictly increasing map from {0,1,2} into {0..5}
    std::vector<int> pool{0, 1, 2, 3, 4, 5};
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<int> f(pool.begin(), pool.begin() + 3);
    std::sort(f.begin(), f.end());
    std::vector<std::optional<int>> raw, mapped;
    for (int i = 0; i < n; ++i) {
      const int s = static_cast<int>(rng() % 3);
      raw.push_back(s);
      mapped.push_back(f[static_cast<std::size_t>(s)]);
    }
    const std::int64_t base = static_cast<std::int64_t>(t) * 16;
    const auto a = rig.run("p", base, raw, 1), b = rig.run("p", base, mapped, 1);
    p.expect(a.winner_index && a.winner_index == b.winner_index,
             "winner moved under a monotone transform at run " + std::to_string(t));
  }

  const auto partial = rig.run("墨梅", 900, {std::nullopt, 1, std::nullopt, 3, std::nullopt});
  p.expect(partial.candidates.size() == 5 && partial.winner_index == std::optional<std::size_t>(3) &&
               !partial.candidates[0].failure_note.empty(),
           "partial-failure run did not produce the expected record");
  const auto none = rig.run("空", 950, {std::nullopt, std::nullopt});
  p.expect(none.candidates.size() == 2 && !none.winner_index, "all-failed run lost its record");
  fs::remove_all(dir);
}

void cot_suite(Probe& p) {
  ClientOptions o;
  o.sleep = [](auto) {};
  int produced = 0, flagged = 0;
  for (int script : {0, 1, -1}) {
    ChatClient client(std::make_shared<mocks::MockChatBackend>(mocks::constructor({script})), o);
    for (int i = 0; i < 40; ++i) {
      const int score = i % 6;
      const LabeledImage item{"c" + std::to_string(script) + "_" + std::to_string(i),
                              "img/" + std::to_string(i) + ".png", 900 + i, 1400,
                              score >= 3 ? Provenance::Authentic : Provenance::Synthetic,
                              std::nullopt, Score(score)};
      const auto res = build_cot(item, client);
      ++produced;
      if (res.flagged) {
        ++flagged;
        p.expect(!res.reason.empty(), "flagged record without a reason");
        continue;
      }
      const auto report = parse_expert_response(res.transcript, item.width, item.height);
      p.expect(res.response && report.complete && res.response->final_score == item.score &&
                   report.score == std::optional<Score>(item.score),
               "record " + item.id + " is neither consistent nor flagged");
    }
  }
  p.expect(produced == 120 && flagged == 40, "expected 40 flagged of 120, got " + std::to_string(flagged));

  const Manifest m = fixture::manifest(50, Split::Train);
  const auto text = emit_manifest_string(m);
  p.expect(parse_manifest(text) == m, "manifest load(emit(m)) != m");
  p.expect(emit_manifest_string(parse_manifest(text)) == text, "manifest emit(load(t)) != t");
}

void determinism_suite(Probe& p) {
  const auto dir = scratch("determinism");
  const Manifest m = fixture::manifest(48);
  const std::string manifest = emit_manifest_string(m);
  const std::string preds = fixture::predictions(m);
  auto config = [&](int jobs) {
    cli::CliConfig c;
    c.jobs = jobs;
    c.mock = true;
    c.content_dir = dir / "content";
    return c;
  };
  const auto e1 = cli::cmd_evaluate(preds, manifest, config(1));
  const auto e8 = cli::cmd_evaluate(preds, manifest, config(8));
  p.expect(e1.exit_code == 0 && !e1.out.empty() && e1.out == e8.out, "evaluate output differs");
  const auto r1 = cli::cmd_reward(preds, manifest, config(1));
  const auto r8 = cli::cmd_reward(preds, manifest, config(8));
  p.expect(r1.exit_code == 0 && !r1.out.empty() && r1.out == r8.out, "reward output differs");
  cli::BonOptions bo;
  bo.base_seed = 123;
  const std::vector<std::string> prompts{"寒江独钓", "松下问童子", "墨竹图", "秋山晚翠"};
  const auto b1 = cli::cmd_bon(prompts, bo, config(1));
  const auto b8 = cli::cmd_bon(prompts, bo, config(8));
  p.expect(!b1.out.empty() && b1.out == b8.out && b1.exit_code == b8.exit_code, "bon output differs");
  fs::remove_all(dir);
}

struct Criterion {
  std::string name;
  double budget_s;  // <= 0: no budget
  std::function<void(Probe&)> run;
};

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<Criterion> criteria = {
      {"reward arithmetic", 5, reward_suite},
      {"iou and matching vs brute force", 10, iou_suite},
      {"grpo kernel", 10, grpo_suite},
      {"metric suite", 10, metric_suite},
      {"parser suite", 5, parser_suite},
      {"label scaling", 5, label_suite},
      {"best-of-n with mocks", 10, bon_suite},
      {"cot construction and manifest round-trip", 10, cot_suite},
      {"determinism under concurrency", 0, determinism_suite},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Probe probe;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(probe);
    } catch (const std::exception& e) {
      probe.problems.push_back(std::string("threw ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      probe.problems.push_back("took " + num(secs) + " s, budget " + num(c.budget_s) + " s");
    }
    const bool ok = probe.ok();
    failed += ok ? 0 : 1;
    std::printf("%s  %-42s %8.3f s  %ld checks\n", ok ? "PASS" : "FAIL", c.name.c_str(), secs,
                probe.checks);
    for (const auto& problem : probe.problems) std::printf("      %s\n", problem.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
