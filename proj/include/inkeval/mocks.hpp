#pragma once

// Deterministic stand-ins for the external models. Every reply is a pure
// function of the request (and, for image-reading mocks, the stored bytes).

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "inkeval/core.hpp"
#include "inkeval/gateway.hpp"

namespace inkeval::mocks {

/// Plausible expert response keyed by `seed` with the given score:
/// theme, 1..4 RoIs with valid boxes, and non-empty texts.
ExpertResponse synthetic_response(std::uint64_t seed, Score score);

/// PGM bytes whose header comment records the seed and prompt hash.
std::string placeholder_image(const GenerationRequest& request);

struct PlaceholderInfo {
  std::int64_t seed = 0;
  int width = 0;
  int height = 0;
};

std::optional<PlaceholderInfo> read_placeholder(std::string_view bytes);

class MockImageBackend final : public ImageBackend {
 public:
  std::string generate(const GenerationRequest& request) override {
    return placeholder_image(request);
  }
};

/// Chat backend driven by a handler; counts calls.
class MockChatBackend final : public ChatBackend {
 public:
  using Handler = std::function<std::string(const ChatRequest&)>;

  explicit MockChatBackend(Handler handler) : handler_(std::move(handler)) {}
  static std::shared_ptr<MockChatBackend> canned(std::string reply);

  std::string complete(const ChatRequest& request) override {
    ++calls_;
    return handler_(request);
  }
  int calls() const noexcept { return calls_.load(); }

 private:
  Handler handler_;
  std::atomic<int> calls_{0};
};

/// What the mock evaluator does for one image.
struct MockVerdict {
  std::optional<int> score;        // nullopt: reply carries no score
  bool recover_on_retry = false;   // score only after the format reminder
};

using VerdictScript = std::function<MockVerdict(std::int64_t seed)>;

/// Evaluator that reads the placeholder seed from the image in the last
/// image-bearing message and answers with a gold-format response.
MockChatBackend::Handler evaluator(std::shared_ptr<const ContentStore> store,
                                   VerdictScript script);

/// Evaluator for scores given per candidate index: seed - base_seed indexes
/// `scores`, where nullopt marks an unscoreable candidate.
MockChatBackend::Handler scripted_evaluator(std::shared_ptr<const ContentStore> store,
                                            std::int64_t base_seed,
                                            std::vector<std::optional<int>> scores);

struct ConstructorScript {
  /// Round-5 replies that contradict the disclosed score before a correct
  /// one; a negative value means it never recovers.
  int wrong_round5 = 0;
};

/// Constructor model for the five-round dialogue and the prompt-generation
/// template. Content is keyed by the image ref; the score comes from the
/// pre-conditioning system message.
MockChatBackend::Handler constructor(ConstructorScript script = {});

}  // namespace inkeval::mocks
