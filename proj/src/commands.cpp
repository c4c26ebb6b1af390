#include "inkeval/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "inkeval/bon.hpp"
#include "inkeval/dataset.hpp"
#include "inkeval/error.hpp"
#include "inkeval/grpo.hpp"
#include "inkeval/hashing.hpp"
#include "inkeval/metrics.hpp"
#include "inkeval/mocks.hpp"
#include "inkeval/parallel.hpp"
#include "inkeval/parser.hpp"
#include "inkeval/reward.hpp"
#include "inkeval/text.hpp"

namespace inkeval::cli {

namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
  if (kind == ErrorKind::Usage) return kExitUsage;
  if (is_external(kind)) return kExitExternal;
  return kExitValidation;
}

CommandResult guarded(const std::function<CommandResult()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    return CommandResult{exit_code_for(e.kind()), "", std::string(e.what()) + "\n"};
  } catch (const Json::exception& e) {
    return CommandResult{kExitValidation, "", std::string("MalformedJson: ") + e.what() + "\n"};
  }
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

[[noreturn]] void bad_config(const std::string& what) {
  throw Error(ErrorKind::Usage, "config: " + what);
}

double number_at(const Json& j, const std::string& path) {
  if (!j.is_number()) bad_config(path + " must be a number");
  return j.get<double>();
}

std::string string_at(const Json& j, const std::string& path) {
  if (!j.is_string()) bad_config(path + " must be a string");
  return j.get<std::string>();
}

void apply_endpoint(EndpointConfig& e, const Json& j, const std::string& path) {
  if (!j.is_object()) bad_config(path + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "url") {
      e.url = string_at(value, path + ".url");
    } else if (key == "model") {
      e.model = string_at(value, path + ".model");
    } else if (key == "key") {
      e.api_key = string_at(value, path + ".key");
    } else if (key == "timeout_ms") {
      e.timeout = std::chrono::milliseconds(static_cast<long long>(number_at(value, path + ".timeout_ms")));
    } else {
      bad_config("unknown key " + path + "." + key);
    }
  }
}

}  // namespace

void apply_config_json(CliConfig& c, const Json& doc) {
  if (!doc.is_object()) bad_config("top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "weights") {
      if (!value.is_object()) bad_config("weights must be an object");
      for (const auto& [k, v] : value.items()) {
        const double x = number_at(v, "weights." + k);
        if (k == "acc") c.weights.w_acc = x;
        else if (k == "bert") c.weights.w_bert = x;
        else if (k == "miou") c.weights.w_miou = x;
        else if (k == "format") c.weights.w_format = x;
        else bad_config("unknown key weights." + k);
      }
    } else if (key == "grpo") {
      if (!value.is_object()) bad_config("grpo must be an object");
      for (const auto& [k, v] : value.items()) {
        const double x = number_at(v, "grpo." + k);
        if (k == "group_size") c.grpo.group_size = static_cast<int>(x);
        else if (k == "clip_epsilon") c.grpo.clip_epsilon = x;
        else if (k == "std_floor") c.grpo.std_floor = x;
        else if (k == "max_ratio") c.grpo.max_ratio = x;
        else bad_config("unknown key grpo." + k);
      }
    } else if (key == "similarity") {
      if (!value.is_object()) bad_config("similarity must be an object");
      for (const auto& [k, v] : value.items()) {
        if (k == "backend") {
          const auto b = string_at(v, "similarity.backend");
          if (b == "builtin") c.scorer = ScorerBackend::BuiltinTokenF1;
          else if (b == "remote") c.scorer = ScorerBackend::RemoteService;
          else bad_config("similarity.backend must be builtin or remote");
        } else if (k == "url") {
          c.similarity_url = string_at(v, "similarity.url");
        } else {
          bad_config("unknown key similarity." + k);
        }
      }
    } else if (key == "evaluator") {
      apply_endpoint(c.evaluator, value, key);
    } else if (key == "constructor") {
      apply_endpoint(c.constructor, value, key);
    } else if (key == "t2i") {
      apply_endpoint(c.t2i, value, key);
    } else if (key == "cache_dir") {
      c.cache_dir = string_at(value, key);
    } else if (key == "content_dir") {
      c.content_dir = string_at(value, key);
    } else if (key == "jobs") {
      c.jobs = static_cast<int>(number_at(value, key));
    } else if (key == "verbose") {
      if (!value.is_boolean()) bad_config("verbose must be a boolean");
      c.verbose = value.get<bool>();
    } else if (key == "mock") {
      if (!value.is_boolean()) bad_config("mock must be a boolean");
      c.mock = value.get<bool>();
    } else {
      bad_config("unknown key " + key);
    }
  }
}

void apply_env(CliConfig& c) {
  auto overlay = [](EndpointConfig& e, std::string_view prefix) {
    const EndpointConfig env = endpoint_from_env(prefix);
    if (!env.url.empty()) e.url = env.url;
    if (!env.api_key.empty()) e.api_key = env.api_key;
    if (!env.model.empty()) e.model = env.model;
  };
  overlay(c.evaluator, "INKEVAL_EVALUATOR");
  overlay(c.constructor, "INKEVAL_CONSTRUCTOR");
  overlay(c.t2i, "INKEVAL_T2I");
  if (const char* v = std::getenv("INKEVAL_CACHE_DIR"); v && *v) c.cache_dir = v;
  if (const char* v = std::getenv("INKEVAL_SIMILARITY_URL"); v && *v) {
    c.similarity_url = v;
    c.scorer = ScorerBackend::RemoteService;
  }
}

CliConfig load_config(const std::optional<fs::path>& config_file) {
  CliConfig c;
  if (config_file) {
    Json doc;
    try {
      doc = Json::parse(read_text_file(*config_file));
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::Usage, "config " + config_file->string() + ": " + e.what());
    }
    apply_config_json(c, doc);
  }
  apply_env(c);
  return c;
}

namespace {

std::unique_ptr<SimilarityScorer> scorer_for(const CliConfig& c) {
  if (c.scorer == ScorerBackend::RemoteService) {
    if (c.similarity_url.empty()) {
      throw Error(ErrorKind::Usage, "remote similarity backend selected but no URL given");
    }
    RemoteScorerOptions opts;
    opts.endpoint = c.similarity_url;
    return make_scorer(ScorerBackend::RemoteService, opts);
  }
  return make_scorer(ScorerBackend::BuiltinTokenF1);
}

ClientOptions client_options(const CliConfig& c) {
  ClientOptions o;
  o.cache_dir = c.cache_dir;
  return o;
}

std::shared_ptr<ContentStore> content_store(const CliConfig& c) {
  fs::path root;
  if (c.content_dir) {
    root = *c.content_dir;
  } else if (c.cache_dir) {
    root = *c.cache_dir / "content";
  } else {
    root = fs::temp_directory_path() / "inkeval-content";
  }
  return std::make_shared<ContentStore>(root);
}

EndpointConfig with_verbosity(EndpointConfig e, bool verbose) {
  e.verbose = verbose;
  return e;
}

struct ResponseLine {
  std::string id;
  std::string response;
};

std::vector<ResponseLine> read_response_lines(std::string_view jsonl) {
  std::vector<ResponseLine> out;
  std::size_t line_no = 0, pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = "responses line " + std::to_string(line_no);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::MalformedJson, where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.at("id").is_string() ||
        !j.contains("response") || !j.at("response").is_string()) {
      throw Error(ErrorKind::SchemaMismatch, where + ": expected {\"id\": str, \"response\": str}");
    }
    out.push_back({j.at("id").get<std::string>(), j.at("response").get<std::string>()});
  }
  return out;
}

const PaintingRecord& find_record(const std::map<std::string, const PaintingRecord*>& by_id,
                                  const std::string& id) {
  const auto it = by_id.find(id);
  if (it == by_id.end()) {
    throw Error(ErrorKind::ValidationFailure, "id '" + id + "' is not in the manifest");
  }
  return *it->second;
}

std::vector<double> numbers(const Json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorKind::SchemaMismatch, std::string(what) + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw Error(ErrorKind::SchemaMismatch, std::string(what) + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Subcommands

CommandResult cmd_parse(std::string_view response_text, int width, int height) {
  return guarded([&] {
    const ParseReport report = parse_expert_response(response_text, width, height);
    CommandResult r;
    r.out = to_json(report).dump(2) + "\n";
    if (!report.complete) {
      r.exit_code = kExitValidation;
      std::string missing;
      for (const auto& p : report.missing_parts) missing += (missing.empty() ? "" : ", ") + p;
      r.err = "incomplete response; missing: " + missing + "\n";
      for (const auto& w : report.warnings) r.err += "  " + w + "\n";
    }
    return r;
  });
}

CommandResult cmd_reward(std::string_view responses_jsonl, std::string_view manifest_text,
                         const CliConfig& config) {
  return guarded([&] {
    config.weights.check();
    const Manifest manifest = parse_manifest(manifest_text);
    std::map<std::string, const PaintingRecord*> by_id;
    for (const auto& rec : manifest.records) by_id[rec.id] = &rec;
    const auto lines = read_response_lines(responses_jsonl);
    std::vector<const PaintingRecord*> gts;
    for (const auto& l : lines) gts.push_back(&find_record(by_id, l.id));

    auto scorer = scorer_for(config);
    std::vector<RewardBreakdown> results(lines.size());
    parallel_for(lines.size(), config.jobs, [&](std::size_t i) {
      const auto& gt = *gts[i];
      results[i] = final_reward(parse_expert_response(lines[i].response, gt.width, gt.height),
                                gt.gt, config.weights, *scorer);
    });
    CommandResult r;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      Json j;
      j["id"] = lines[i].id;
      const Json breakdown = to_json(results[i]);
      for (const auto& [k, v] : breakdown.items()) j[k] = v;
      r.out += dump_line(j);
    }
    return r;
  });
}

CommandResult cmd_advantages(std::string_view rewards_json, const CliConfig& config) {
  return guarded([&] {
    const Json doc = Json::parse(rewards_json);
    CommandResult r;
    if (doc.is_array() && !doc.empty() && doc.front().is_array()) {
      Json out = Json::array();
      for (const auto& g : doc) out.push_back(group_advantages(numbers(g, "group"), config.grpo.std_floor));
      r.out = dump_line(Json{{"advantages", out}});
    } else {
      r.out = dump_line(
          Json{{"advantages", group_advantages(numbers(doc, "rewards"), config.grpo.std_floor)}});
    }
    return r;
  });
}

CommandResult cmd_surrogate(std::string_view input_json, const CliConfig& config) {
  return guarded([&] {
    config.grpo.check();
    const Json doc = Json::parse(input_json);
    if (!doc.is_object() || !doc.contains("rewards")) {
      throw Error(ErrorKind::SchemaMismatch, "surrogate input needs \"rewards\"");
    }
    const auto rewards = numbers(doc.at("rewards"), "rewards");
    std::vector<GroupSample> samples(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i) samples[i].reward = rewards[i];
    if (doc.contains("ratios")) {
      const auto ratios = numbers(doc.at("ratios"), "ratios");
      if (ratios.size() != rewards.size()) throw Error(ErrorKind::LengthMismatch, "ratios vs rewards");
      for (std::size_t i = 0; i < ratios.size(); ++i) {
        if (!(ratios[i] > 0.0)) throw Error(ErrorKind::InvalidValue, "ratios must be positive");
        // Expressed as log-probs relative to a reference of 0.
        samples[i].logp_old = -std::max(0.0, std::log(ratios[i])) - 1.0;
        samples[i].logp_new = samples[i].logp_old + std::log(ratios[i]);
      }
    } else {
      const auto lp_new = numbers(doc.at("logp_new"), "logp_new");
      const auto lp_old = numbers(doc.at("logp_old"), "logp_old");
      if (lp_new.size() != rewards.size() || lp_old.size() != rewards.size()) {
        throw Error(ErrorKind::LengthMismatch, "log-prob arrays must match rewards");
      }
      for (std::size_t i = 0; i < rewards.size(); ++i) {
        samples[i].logp_new = lp_new[i];
        samples[i].logp_old = lp_old[i];
      }
    }
    const double objective = clipped_surrogate(samples, config.grpo);
    const auto adv = group_advantages(rewards, config.grpo.std_floor);
    CommandResult r;
    r.out = dump_line(Json{{"objective", objective},
                           {"clip_epsilon", config.grpo.clip_epsilon},
                           {"advantages", adv}});
    return r;
  });
}

CommandResult cmd_evaluate(std::string_view predictions_jsonl, std::string_view manifest_text,
                           const CliConfig& config, ReportFormat format) {
  return guarded([&] {
    const Manifest manifest = parse_manifest(manifest_text);
    const auto lines = read_response_lines(predictions_jsonl);
    std::map<std::string, std::size_t> pred_index;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (!pred_index.emplace(lines[i].id, i).second) {
        throw Error(ErrorKind::ValidationFailure, "duplicate prediction id '" + lines[i].id + "'");
      }
    }
    std::set<std::string> manifest_ids;
    for (const auto& rec : manifest.records) manifest_ids.insert(rec.id);
    for (const auto& l : lines) {
      if (!manifest_ids.contains(l.id)) {
        throw Error(ErrorKind::ValidationFailure, "prediction id '" + l.id + "' is not in the manifest");
      }
    }
    for (const auto& id : manifest_ids) {
      if (!pred_index.contains(id)) {
        throw Error(ErrorKind::ValidationFailure, "manifest id '" + id + "' has no prediction");
      }
    }
    if (manifest.records.empty()) throw Error(ErrorKind::EmptyInput, "manifest has no records");

    const std::size_t n = manifest.records.size();
    std::vector<ParseReport> preds(n);
    std::vector<ExpertResponse> gts;
    for (const auto& rec : manifest.records) gts.push_back(rec.gt);
    parallel_for(n, config.jobs, [&](std::size_t i) {
      const auto& rec = manifest.records[i];
      preds[i] = parse_expert_response(lines[pred_index.at(rec.id)].response, rec.width, rec.height);
    });
    auto scorer = scorer_for(config);
    const MetricReport report = evaluate_predictions(preds, gts, *scorer, config.jobs);
    CommandResult r;
    r.out = format == ReportFormat::Json ? to_json(report).dump(2) + "\n" : to_key_value(report);
    return r;
  });
}

namespace {

bool failed_externally(const BonCandidate& c) {
  for (int k = 0; k <= static_cast<int>(ErrorKind::Usage); ++k) {
    const auto kind = static_cast<ErrorKind>(k);
    if (is_external(kind) && c.failure_note.starts_with(std::string(to_string(kind)) + ":")) return true;
  }
  return false;
}

}  // namespace

CommandResult cmd_bon(const std::vector<std::string>& prompts_in, const BonOptions& options,
                      const CliConfig& config) {
  return guarded([&] {
    if (options.n < 1) throw Error(ErrorKind::Usage, "n must be >= 1");
    if (prompts_in.empty()) throw Error(ErrorKind::Usage, "no prompt given");
    auto store = content_store(config);

    std::shared_ptr<ImageBackend> image_backend;
    std::shared_ptr<ChatBackend> chat_backend;
    if (config.mock) {
      image_backend = std::make_shared<mocks::MockImageBackend>();
      mocks::VerdictScript script;
      if (options.mock_scores.empty()) {
        script = [](std::int64_t seed) {
          return mocks::MockVerdict{
              static_cast<int>(fnv1a64(static_cast<std::uint64_t>(seed), "score") % 6), false};
        };
      } else {
        std::vector<std::optional<int>> scores;
        for (const auto& s : options.mock_scores) {
          if (s == "x" || s == "X") {
            scores.emplace_back(std::nullopt);
            continue;
          }
          try {
            std::size_t used = 0;
            const int v = std::stoi(s, &used);
            if (used != s.size() || v < kMinScore || v > kMaxScore) throw std::invalid_argument(s);
            scores.emplace_back(v);
          } catch (const std::exception&) {
            throw Error(ErrorKind::Usage, "mock score '" + s + "' must be 0..5 or x");
          }
        }
        if (static_cast<int>(scores.size()) != options.n) {
          throw Error(ErrorKind::Usage, "need exactly n mock scores");
        }
        const auto base = options.base_seed;
        script = [base, scores](std::int64_t seed) {
          const auto i = seed - base;
          if (i < 0 || i >= static_cast<std::int64_t>(scores.size())) return mocks::MockVerdict{};
          return mocks::MockVerdict{scores[static_cast<std::size_t>(i)], false};
        };
      }
      chat_backend = std::make_shared<mocks::MockChatBackend>(mocks::evaluator(store, script));
    } else {
      image_backend = std::make_shared<HttpImageBackend>(with_verbosity(config.t2i, config.verbose));
      chat_backend =
          std::make_shared<HttpChatBackend>(with_verbosity(config.evaluator, config.verbose), store);
    }
    ImageClient t2i(image_backend, store, client_options(config));
    ChatClient evaluator(chat_backend, client_options(config));

    BonConfig bc;
    bc.n = options.n;
    bc.base_seed = options.base_seed;
    bc.aspect = options.aspect;
    bc.t2i_model = config.mock ? "mock-t2i" : config.t2i.model;
    bc.evaluator.model_id = config.mock ? "mock-evaluator" : config.evaluator.model;
    bc.jobs = config.jobs;

    CommandResult r;
    for (const auto& prompt : prompts_in) {
      const BonRunRecord rec = run_bon(prompt, bc, t2i, evaluator);
      r.out += dump_line(to_json(rec));
      if (!rec.winner_index) {
        // Every candidate lost to a service error: report it as external.
        const bool external = std::all_of(rec.candidates.begin(), rec.candidates.end(),
                                          [](const BonCandidate& c) { return failed_externally(c); });
        r.exit_code = std::max(r.exit_code, external ? kExitExternal : kExitValidation);
        r.err += "NoValidCandidates: no scoreable candidate for prompt '" + prompt + "'\n";
      }
    }
    return r;
  });
}

namespace {

std::string cell(const std::vector<std::pair<std::string, std::string>>& row, const std::string& key,
                 const std::string& where) {
  for (const auto& [k, v] : row) {
    if (k == key) return v;
  }
  throw Error(ErrorKind::SchemaMismatch, where + ": missing column '" + key + "'");
}

int int_cell(const std::vector<std::pair<std::string, std::string>>& row, const std::string& key,
             const std::string& where) {
  const std::string v = cell(row, key, where);
  try {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorKind::SchemaMismatch, where + ": column '" + key + "' is not an integer");
  }
}

std::map<std::string, ReviewVerdict> read_reviews(const fs::path& path) {
  std::map<std::string, ReviewVerdict> out;
  for (const auto& row : read_csv_records(read_text_file(path))) {
    const std::string where = path.filename().string();
    const std::string verdict = cell(row, "verdict", where);
    if (verdict != "approved" && verdict != "rejected") {
      throw Error(ErrorKind::SchemaMismatch, where + ": verdict must be approved or rejected");
    }
    out[cell(row, "id", where)] =
        verdict == "approved" ? ReviewVerdict::Approved : ReviewVerdict::Rejected;
  }
  return out;
}

}  // namespace

CommandResult cmd_build_dataset(const fs::path& sources_path, const fs::path& out_path,
                                const CliConfig& config) {
  return guarded([&] {
    Json src;
    try {
      src = Json::parse(read_text_file(sources_path));
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::Usage, "sources " + sources_path.string() + ": " + e.what());
    }
    const fs::path base = sources_path.parent_path();
    auto resolve = [&](const char* key) -> std::optional<fs::path> {
      if (!src.contains(key) || src.at(key).is_null()) return std::nullopt;
      fs::path p = src.at(key).get<std::string>();
      return p.is_absolute() ? p : base / p;
    };

    std::vector<LabeledImage> items;
    std::map<std::string, int> tier_counts;
    if (auto path = resolve("authentic")) {
      const auto rows = read_csv_records(read_text_file(*path));
      std::vector<Valuation> vals;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string where = path->filename().string() + " row " + std::to_string(i + 2);
        const std::string amount = cell(rows[i], "valuation", where);
        char* end = nullptr;
        const double v = std::strtod(amount.c_str(), &end);
        if (end == amount.c_str() || *end != '\0') {
          throw Error(ErrorKind::SchemaMismatch, where + ": valuation is not a number");
        }
        vals.push_back({cell(rows[i], "id", where), v});
      }
      const auto labels = scale_auction_labels(vals);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string where = path->filename().string() + " row " + std::to_string(i + 2);
        items.push_back(LabeledImage{labels[i].id, cell(rows[i], "image_ref", where),
                                     int_cell(rows[i], "width", where),
                                     int_cell(rows[i], "height", where), Provenance::Authentic,
                                     vals[i].amount, labels[i].score});
        ++tier_counts[std::to_string(labels[i].score.value())];
      }
    }
    if (auto path = resolve("synthetic")) {
      const auto rows = read_csv_records(read_text_file(*path));
      std::set<std::string> rejected;
      if (auto reviews = resolve("synthetic_reviews")) {
        for (const auto& [id, verdict] : read_reviews(*reviews)) {
          if (verdict == ReviewVerdict::Rejected) rejected.insert(id);
        }
      }
      std::vector<SyntheticAssignment> assignments;
      std::map<std::string, std::size_t> row_of;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string where = path->filename().string() + " row " + std::to_string(i + 2);
        assignments.push_back({cell(rows[i], "id", where), int_cell(rows[i], "level", where)});
        row_of[assignments.back().id] = i;
      }
      for (const auto& label : ingest_synthetic_labels(assignments, rejected)) {
        const auto& row = rows[row_of.at(label.id)];
        const std::string where = path->filename().string();
        items.push_back(LabeledImage{label.id, cell(row, "image_ref", where),
                                     int_cell(row, "width", where), int_cell(row, "height", where),
                                     Provenance::Synthetic, std::nullopt, label.score});
      }
    }
    if (items.empty()) throw Error(ErrorKind::EmptyInput, "sources name no images");
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

    auto store = content_store(config);
    std::shared_ptr<ChatBackend> backend;
    if (config.mock) {
      backend = std::make_shared<mocks::MockChatBackend>(mocks::constructor());
    } else {
      backend = std::make_shared<HttpChatBackend>(with_verbosity(config.constructor, config.verbose),
                                                  store);
    }
    ChatClient constructor(backend, client_options(config));
    CotSettings settings;
    settings.model_id = config.mock ? "mock-constructor" : config.constructor.model;

    std::vector<CotResult> cots(items.size());
    parallel_for(items.size(), config.jobs,
                 [&](std::size_t i) { cots[i] = build_cot(items[i], constructor, settings); });

    Manifest manifest;
    if (src.contains("split")) {
      const auto split = split_from_string(src.at("split").get<std::string>());
      if (!split) throw Error(ErrorKind::Usage, "sources: split must be train or test");
      manifest.split = *split;
    }
    std::string flagged;
    std::size_t flagged_count = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& item = items[i];
      if (cots[i].flagged || !cots[i].response) {
        ++flagged_count;
        flagged += dump_line(Json{{"id", item.id},
                                  {"label", item.score.value()},
                                  {"reason", cots[i].reason},
                                  {"transcript", cots[i].transcript}});
        continue;
      }
      manifest.records.push_back(PaintingRecord{item.id, item.image_ref, item.width, item.height,
                                                item.provenance, item.raw_valuation,
                                                *cots[i].response, false});
    }
    if (auto reviews = resolve("expert_reviews")) {
      std::vector<ExpertReview> list;
      for (const auto& [id, verdict] : read_reviews(*reviews)) list.push_back({id, verdict});
      manifest = apply_expert_reviews(manifest, list);
    }
    if (src.contains("balance_tolerance") && !src.at("balance_tolerance").is_null()) {
      manifest = balance_manifest(manifest, src.at("balance_tolerance").get<double>(),
                                  src.value("seed", std::uint64_t{0}));
    }
    emit_manifest(manifest, out_path);
    write_file_atomic(out_path.string() + ".flagged.jsonl", flagged);

    std::map<std::string, int> manifest_tiers;
    for (const auto& rec : manifest.records) ++manifest_tiers[std::to_string(rec.gt.final_score.value())];
    Json summary{{"records", manifest.records.size()},
                 {"flagged", flagged_count},
                 {"authentic_tiers", tier_counts},
                 {"score_counts", manifest_tiers},
                 {"manifest", out_path.string()}};
    CommandResult r;
    r.out = summary.dump(2) + "\n";
    return r;
  });
}

CommandResult cmd_human_corr(std::string_view model_scores_json, std::string_view human_ranks_json) {
  return guarded([&] {
    const Json model = Json::parse(model_scores_json);
    const Json human = Json::parse(human_ranks_json);
    if (!model.is_object() || !human.is_object()) {
      throw Error(ErrorKind::SchemaMismatch, "inputs must map group id to an array");
    }
    std::vector<RankGroup> groups;
    for (const auto& [id, scores] : model.items()) {
      if (!human.contains(id)) {
        throw Error(ErrorKind::ValidationFailure, "group '" + id + "' has no human ranking");
      }
      const auto s = numbers(scores, "model scores");
      if (s.empty()) throw Error(ErrorKind::EmptyInput, "group '" + id + "' has no scores");
      groups.push_back(RankGroup{id, scores_to_ranking(s), numbers(human.at(id), "human ranks")});
    }
    for (const auto& [id, _] : human.items()) {
      if (!model.contains(id)) {
        throw Error(ErrorKind::ValidationFailure, "group '" + id + "' has no model scores");
      }
    }
    const auto report = aggregate_rank_correlations(groups);
    CommandResult r;
    r.out = to_json(report).dump(2) + "\n";
    return r;
  });
}

}  // namespace inkeval::cli
