// Python bindings. Structured results cross the boundary as JSON text and
// are decoded by the package's __init__.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>

#include "inkeval/bon.hpp"
#include "inkeval/dataset.hpp"
#include "inkeval/error.hpp"
#include "inkeval/grpo.hpp"
#include "inkeval/metrics.hpp"
#include "inkeval/mocks.hpp"
#include "inkeval/parser.hpp"
#include "inkeval/reward.hpp"
#include "inkeval/similarity.hpp"

namespace py = pybind11;
using namespace inkeval;

namespace {

ExpertResponse gold_from_text(const std::string& text, int width, int height) {
  ParseReport report = parse_expert_response(text, width, height);
  if (!report.complete) {
    throw Error(ErrorKind::ValidationFailure, "ground-truth text does not parse complete");
  }
  return *report.response;
}

std::string reward_json(const std::string& response, const std::string& gold, double w_acc,
                        double w_bert, double w_miou, double w_format, int width, int height) {
  RewardWeights w{w_acc, w_bert, w_miou, w_format};
  w.check();
  TokenF1Scorer scorer;
  const auto gt = gold_from_text(gold, width, height);
  return to_json(final_reward(parse_expert_response(response, width, height), gt, w, scorer)).dump();
}

std::string bon_mock_json(const std::string& prompt, const std::vector<std::optional<int>>& scores,
                          std::int64_t base_seed, int jobs, const std::string& content_dir) {
  auto store = std::make_shared<ContentStore>(content_dir);
  ImageClient t2i(std::make_shared<mocks::MockImageBackend>(), store);
  ChatClient evaluator(std::make_shared<mocks::MockChatBackend>(
      mocks::scripted_evaluator(store, base_seed, scores)));
  BonConfig config;
  config.n = static_cast<int>(scores.size());
  config.base_seed = base_seed;
  config.jobs = jobs;
  config.t2i_model = "mock-t2i";
  config.evaluator.model_id = "mock-evaluator";
  return to_json(run_bon(prompt, config, t2i, evaluator)).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "inkeval native core";

  static py::exception<Error> error_type(m, "InkevalError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, e.what());
    }
  });

  m.def("parse_json", [](const std::string& text, int width, int height) {
    return to_json(parse_expert_response(text, width, height)).dump();
  }, py::arg("text"), py::arg("width") = 0, py::arg("height") = 0);

  m.def("render", [](const std::string& gold_json) {
    return render_expert_response(expert_response_from_json(Json::parse(gold_json)));
  });

  m.def("token_f1", &token_f1);

  m.def("accuracy_reward", [](int pred, int gt) { return accuracy_reward(Score(pred), Score(gt)); });

  m.def("reward_json", &reward_json, py::arg("response"), py::arg("gold"), py::arg("w_acc") = 10.0,
        py::arg("w_bert") = 2.0, py::arg("w_miou") = 2.0, py::arg("w_format") = 1.0,
        py::arg("width") = 0, py::arg("height") = 0);

  m.def("iou", [](std::array<double, 4> a, std::array<double, 4> b) {
    return iou(BoundingBox(a[0], a[1], a[2], a[3]), BoundingBox(b[0], b[1], b[2], b[3]));
  });

  m.def("group_advantages", [](const std::vector<double>& rewards, double std_floor) {
    return group_advantages(rewards, std_floor);
  }, py::arg("rewards"), py::arg("std_floor") = 1e-8);

  m.def("clipped_surrogate", [](const std::vector<double>& rewards, const std::vector<double>& logp_new,
                                const std::vector<double>& logp_old, double clip_epsilon) {
    if (logp_new.size() != rewards.size() || logp_old.size() != rewards.size()) {
      throw Error(ErrorKind::LengthMismatch, "log-prob arrays must match rewards");
    }
    std::vector<GroupSample> samples;
    for (std::size_t i = 0; i < rewards.size(); ++i) {
      samples.push_back(GroupSample{"", rewards[i], logp_new[i], logp_old[i]});
    }
    GrpoConfig config;
    config.clip_epsilon = clip_epsilon;
    config.check();
    return clipped_surrogate(samples, config);
  }, py::arg("rewards"), py::arg("logp_new"), py::arg("logp_old"), py::arg("clip_epsilon") = 0.2);

  m.def("score_metrics", [](const std::vector<int>& preds, const std::vector<int>& gts) {
    std::vector<Score> p, g;
    for (int v : preds) p.emplace_back(v);
    for (int v : gts) g.emplace_back(v);
    const auto r = score_metrics(p, g);
    return py::dict(py::arg("mae") = r.mae, py::arg("rmse") = r.rmse,
                    py::arg("accuracy") = r.accuracy, py::arg("n") = r.n);
  });

  m.def("rank_correlations_json", [](const std::vector<double>& a, const std::vector<double>& b) {
    return to_json(rank_correlations(a, b)).dump();
  });

  m.def("scores_to_ranking", [](const std::vector<double>& s) { return scores_to_ranking(s); });

  m.def("scale_auction_labels", [](const std::vector<std::pair<std::string, double>>& items) {
    std::vector<Valuation> vals;
    for (const auto& [id, amount] : items) vals.push_back({id, amount});
    std::vector<std::pair<std::string, int>> out;
    for (const auto& l : scale_auction_labels(vals)) out.emplace_back(l.id, l.score.value());
    return out;
  });

  m.def("classify_scroll_type", [](int width, int height) {
    return std::string(to_string(classify_scroll_type(width, height)));
  });

  m.def("bon_mock_json", &bon_mock_json, py::arg("prompt"), py::arg("scores"),
        py::arg("base_seed") = 0, py::arg("jobs") = 1, py::arg("content_dir"));
}
