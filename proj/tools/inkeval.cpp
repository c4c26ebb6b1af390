// Command-line entry point. Subcommand logic lives in the library; this file
// only parses flags and moves bytes between files and the commands.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "inkeval/commands.hpp"
#include "inkeval/error.hpp"
#include "inkeval/text.hpp"

namespace fs = std::filesystem;
using namespace inkeval;

namespace {

struct Flags {
  std::optional<std::string> config;
  std::optional<int> jobs;
  std::optional<std::string> cache_dir;
  std::optional<std::string> content_dir;
  std::optional<std::string> similarity_url;
  std::optional<std::string> scorer;
  std::optional<double> w_acc, w_bert, w_miou, w_format;
  std::optional<double> clip_epsilon;
  std::optional<std::string> evaluator_url, evaluator_model, t2i_url, t2i_model, constructor_url,
      constructor_model;
  bool mock = false;
  bool verbose = false;
};

cli::CliConfig resolve(const Flags& f) {
  cli::CliConfig c = cli::load_config(f.config ? std::optional<fs::path>(*f.config) : std::nullopt);
  if (f.jobs) c.jobs = *f.jobs;
  if (f.cache_dir) c.cache_dir = *f.cache_dir;
  if (f.content_dir) c.content_dir = *f.content_dir;
  if (f.similarity_url) {
    c.similarity_url = *f.similarity_url;
    c.scorer = ScorerBackend::RemoteService;
  }
  if (f.scorer) c.scorer = *f.scorer == "remote" ? ScorerBackend::RemoteService : ScorerBackend::BuiltinTokenF1;
  if (f.w_acc) c.weights.w_acc = *f.w_acc;
  if (f.w_bert) c.weights.w_bert = *f.w_bert;
  if (f.w_miou) c.weights.w_miou = *f.w_miou;
  if (f.w_format) c.weights.w_format = *f.w_format;
  if (f.clip_epsilon) c.grpo.clip_epsilon = *f.clip_epsilon;
  if (f.evaluator_url) c.evaluator.url = *f.evaluator_url;
  if (f.evaluator_model) c.evaluator.model = *f.evaluator_model;
  if (f.t2i_url) c.t2i.url = *f.t2i_url;
  if (f.t2i_model) c.t2i.model = *f.t2i_model;
  if (f.constructor_url) c.constructor.url = *f.constructor_url;
  if (f.constructor_model) c.constructor.model = *f.constructor_model;
  if (f.mock) c.mock = true;
  if (f.verbose) c.verbose = true;
  return c;
}

int emit(const cli::CommandResult& r, const std::optional<std::string>& out_path) {
  if (out_path && !r.out.empty()) {
    std::ofstream out(*out_path, std::ios::binary);
    out << r.out;
    if (!out) {
      std::cerr << "IoFailure: cannot write " << *out_path << "\n";
      return cli::kExitValidation;
    }
  } else {
    std::cout << r.out;
  }
  std::cerr << r.err;
  return r.exit_code;
}

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return cli::read_text_file(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"inkeval: expert-style evaluation, rewards and metrics for Chinese painting"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("-j,--jobs", f.jobs, "Parallel workers")->check(CLI::PositiveNumber);
  app.add_option("--cache-dir", f.cache_dir, "Response cache directory");
  app.add_option("--content-dir", f.content_dir, "Image content store directory");
  app.add_option("--similarity-url", f.similarity_url, "Similarity service base URL");
  app.add_option("--scorer", f.scorer, "Similarity backend")->check(CLI::IsMember({"builtin", "remote"}));
  app.add_option("--w-acc", f.w_acc, "Accuracy reward weight");
  app.add_option("--w-bert", f.w_bert, "Part similarity reward weight");
  app.add_option("--w-miou", f.w_miou, "RoI reward weight");
  app.add_option("--w-format", f.w_format, "Format reward weight");
  app.add_option("--clip-epsilon", f.clip_epsilon, "Surrogate clip range");
  app.add_option("--evaluator-url", f.evaluator_url, "Evaluator endpoint URL");
  app.add_option("--evaluator-model", f.evaluator_model, "Evaluator model id");
  app.add_option("--t2i-url", f.t2i_url, "Text-to-image endpoint URL");
  app.add_option("--t2i-model", f.t2i_model, "Text-to-image model id");
  app.add_option("--constructor-url", f.constructor_url, "Constructor endpoint URL");
  app.add_option("--constructor-model", f.constructor_model, "Constructor model id");
  app.add_flag("--mock", f.mock, "Use deterministic mock models");
  app.add_flag("-v,--verbose", f.verbose, "Log requests and replies (keys redacted)");

  std::optional<std::string> out_path;
  app.add_option("-o,--output", out_path, "Write the result here instead of stdout");

  std::string input, manifest, responses, predictions, rewards, prompt, prompt_file, sources,
      model_scores, human_ranks;
  int width = 0, height = 0;

  auto* parse = app.add_subcommand("parse", "Parse a raw evaluator response");
  parse->add_option("input", input, "Response text file, or - for stdin")->required();
  parse->add_option("--width", width, "Image width in pixels");
  parse->add_option("--height", height, "Image height in pixels");

  auto* reward = app.add_subcommand("reward", "Reward breakdown per response");
  reward->add_option("responses", responses, "JSONL of {id, response}")->required();
  reward->add_option("--manifest", manifest, "Manifest with ground truth")->required();

  auto* adv = app.add_subcommand("advantages", "Group-relative advantages");
  adv->add_option("rewards", rewards, "JSON array of rewards (or of groups), - for stdin")->required();

  auto* surrogate = app.add_subcommand("surrogate", "Clipped surrogate objective for one group");
  surrogate->add_option("input", input, "JSON {rewards, logp_new, logp_old} or {rewards, ratios}")
      ->required();

  auto* evaluate = app.add_subcommand("evaluate", "Full metric report");
  evaluate->add_option("predictions", predictions, "JSONL of {id, response}")->required();
  evaluate->add_option("--manifest", manifest, "Manifest with ground truth")->required();
  bool key_value = false;
  evaluate->add_flag("--kv", key_value, "Flat key=value output");

  auto* bon = app.add_subcommand("bon", "Best-of-N generation");
  cli::BonOptions bon_opts;
  std::string aspect = "free";
  auto* prompt_opt = bon->add_option("--prompt", prompt, "Prompt text");
  bon->add_option("--prompt-file", prompt_file, "One prompt per line")->excludes(prompt_opt);
  bon->add_option("-n", bon_opts.n, "Candidates per prompt");
  bon->add_option("--seed", bon_opts.base_seed, "Seed of candidate 0");
  bon->add_option("--aspect", aspect, "Aspect ratio")
      ->check(CLI::IsMember({"hanging", "square", "handscroll", "free"}));
  bon->add_option("--mock-scores", bon_opts.mock_scores,
                  "Mock evaluator score per candidate (0-5, x for unscoreable)")
      ->delimiter(',');

  auto* build = app.add_subcommand("build-dataset", "Build a manifest from sources");
  build->add_option("sources", sources, "Sources JSON document")->required();
  std::string build_out;
  build->add_option("--out", build_out, "Manifest path")->required();

  auto* corr = app.add_subcommand("human-corr", "Rank agreement with human rankings");
  corr->add_option("model_scores", model_scores, "JSON {group: [scores]}")->required();
  corr->add_option("human_ranks", human_ranks, "JSON {group: [ranks]}")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitUsage;
  }

  spdlog::set_level(f.verbose ? spdlog::level::info : spdlog::level::warn);
  spdlog::set_pattern("[%l] %v");

  try {
    const cli::CliConfig config = resolve(f);
    if (*parse) return emit(cli::cmd_parse(slurp(input), width, height), out_path);
    if (*reward) return emit(cli::cmd_reward(slurp(responses), slurp(manifest), config), out_path);
    if (*adv) return emit(cli::cmd_advantages(slurp(rewards), config), out_path);
    if (*surrogate) return emit(cli::cmd_surrogate(slurp(input), config), out_path);
    if (*evaluate) {
      return emit(cli::cmd_evaluate(slurp(predictions), slurp(manifest), config,
                                    key_value ? cli::ReportFormat::KeyValue : cli::ReportFormat::Json),
                  out_path);
    }
    if (*bon) {
      std::vector<std::string> prompts;
      if (!prompt.empty()) prompts.push_back(prompt);
      if (!prompt_file.empty()) {
        std::istringstream lines(slurp(prompt_file));
        for (std::string line; std::getline(lines, line);) {
          if (!text::trim(line).empty()) prompts.emplace_back(text::trim(line));
        }
      }
      bon_opts.aspect = aspect_from_string(aspect).value_or(Aspect::Free);
      return emit(cli::cmd_bon(prompts, bon_opts, config), out_path);
    }
    if (*build) return emit(cli::cmd_build_dataset(sources, build_out, config), out_path);
    if (*corr) return emit(cli::cmd_human_corr(slurp(model_scores), slurp(human_ranks)), out_path);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return cli::exit_code_for(e.kind());
  }
  return cli::kExitUsage;
}
