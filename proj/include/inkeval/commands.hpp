#pragma once

// Subcommand implementations behind the inkeval tool. Each returns its
// stdout text and exit code so it can be driven without a process.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inkeval/core.hpp"
#include "inkeval/gateway.hpp"
#include "inkeval/serialization.hpp"
#include "inkeval/similarity.hpp"

namespace inkeval::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitExternal = 2;
inline constexpr int kExitUsage = 64;

int exit_code_for(ErrorKind kind);

struct CommandResult {
  int exit_code = kExitOk;
  std::string out;
  std::string err;
};

struct CliConfig {
  RewardWeights weights;
  GrpoConfig grpo;
  ScorerBackend scorer = ScorerBackend::BuiltinTokenF1;
  std::string similarity_url;
  EndpointConfig evaluator;
  EndpointConfig constructor;
  EndpointConfig t2i;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> content_dir;
  bool verbose = false;
  bool mock = false;
  int jobs = 1;
};

/// Overlays a JSON config document onto `config`. Throws Usage on unknown
/// keys or wrong types.
void apply_config_json(CliConfig& config, const Json& doc);
/// Overlays INKEVAL_* environment variables.
void apply_env(CliConfig& config);
/// Defaults, then the config file (if any), then the environment. Flags are
/// applied by the caller last.
CliConfig load_config(const std::optional<std::filesystem::path>& config_file);

/// Wraps a command body: maps inkeval errors to exit codes and messages.
CommandResult guarded(const std::function<CommandResult()>& body);

CommandResult cmd_parse(std::string_view response_text, int width = 0, int height = 0);

/// `responses_jsonl`: lines {"id", "response"}; one breakdown line per input.
CommandResult cmd_reward(std::string_view responses_jsonl, std::string_view manifest_text,
                         const CliConfig& config);

/// A JSON array of rewards, or an array of such arrays.
CommandResult cmd_advantages(std::string_view rewards_json, const CliConfig& config);

/// {"rewards": [...], "logp_new": [...], "logp_old": [...]} (log-prob arrays
/// may be replaced by "ratios").
CommandResult cmd_surrogate(std::string_view input_json, const CliConfig& config);

enum class ReportFormat { Json, KeyValue };

/// Predictions must cover exactly the manifest's ids.
CommandResult cmd_evaluate(std::string_view predictions_jsonl, std::string_view manifest_text,
                           const CliConfig& config, ReportFormat format = ReportFormat::Json);

struct BonOptions {
  int n = 8;
  std::int64_t base_seed = 0;
  Aspect aspect = Aspect::Free;
  /// Mock evaluator scores per candidate; "x" marks an unscoreable one.
  /// Empty: a score derived from each candidate's seed.
  std::vector<std::string> mock_scores;
};

/// One BoN record line per prompt. Exit 1 when a prompt has no scoreable
/// candidate, or 2 when every candidate failed on a service error; the record
/// is written either way.
CommandResult cmd_bon(const std::vector<std::string>& prompts, const BonOptions& options,
                      const CliConfig& config);

/// Builds a manifest from a sources document (see README). Writes the
/// manifest to `out_path` and flagged CoTs to `<out_path>.flagged.jsonl`.
CommandResult cmd_build_dataset(const std::filesystem::path& sources_path,
                                const std::filesystem::path& out_path, const CliConfig& config);

/// Both inputs map group id to an array: model scores and human ranks.
CommandResult cmd_human_corr(std::string_view model_scores_json, std::string_view human_ranks_json);

/// Reads a whole file; throws IoFailure.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace inkeval::cli
