#pragma once

// Clients for chat-VLM and text-to-image endpoints in the OpenAI-compatible
// shape, with retry, a content-addressed response cache and mock backends.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "inkeval/error.hpp"
#include "inkeval/parallel.hpp"
#include "inkeval/serialization.hpp"

namespace inkeval {

struct ChatMessage {
  std::string role;  // system, user or assistant
  std::string text;
  std::optional<std::string> image_ref;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  std::string model_id;
  double temperature = 0.0;
  std::optional<std::int64_t> seed;

  /// Throws InvalidValue on an empty message list, an unknown role or a
  /// negative temperature.
  void check() const;
};

enum class Aspect { Hanging, Square, Handscroll, Free };

std::string_view to_string(Aspect a);
std::optional<Aspect> aspect_from_string(std::string_view text);

struct GenerationRequest {
  std::string prompt;
  Aspect aspect = Aspect::Free;
  std::string model_id;
  std::optional<std::int64_t> seed;

  void check() const;
};

/// Canonical request JSON; its SHA-256 is the cache key.
Json canonical_json(const ChatRequest& request);
Json canonical_json(const GenerationRequest& request);

/// Immutable blobs on disk, addressed as "sha256:<hex>". Safe to share
/// between threads and processes.
class ContentStore {
 public:
  explicit ContentStore(std::filesystem::path root);

  std::string put(std::string_view bytes);
  /// Reads a stored ref or, for anything else, a plain file path.
  /// Throws IoFailure when missing.
  std::string get(std::string_view ref) const;
  bool contains(std::string_view ref) const;
  std::filesystem::path path_of(std::string_view ref) const;
  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  std::filesystem::path root_;
};

/// Writes `bytes` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Successful responses keyed by request hash. Always memoizes in memory;
/// persists to `dir` when one is given.
class ResponseCache {
 public:
  explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

  std::optional<std::string> get(const std::string& key);
  void put(const std::string& key, const std::string& value);

 private:
  std::optional<std::filesystem::path> dir_;
  std::mutex mu_;
  std::unordered_map<std::string, std::string> memory_;
};

/// A failure worth retrying: transport errors, 5xx and 429. Carries
/// EndpointUnavailable so callers that give up see the right kind.
class TransientFailure : public Error {
 public:
  explicit TransientFailure(const std::string& detail)
      : Error(ErrorKind::EndpointUnavailable, detail) {}
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  /// Assistant text. Throws TransientFailure, or a non-retryable Error
  /// (EndpointUnavailable when unconfigured, AuthError, RequestRejected,
  /// ResponseEmpty).
  virtual std::string complete(const ChatRequest& request) = 0;
};

class ImageBackend {
 public:
  virtual ~ImageBackend() = default;
  /// Raw image bytes; errors as ChatBackend.
  virtual std::string generate(const GenerationRequest& request) = 0;
};

struct EndpointConfig {
  std::string url;  // base URL, e.g. https://host/v1
  std::string api_key;
  std::string model;
  std::chrono::milliseconds timeout{120000};
  bool verbose = false;
};

/// Reads {PREFIX}_URL, {PREFIX}_KEY and {PREFIX}_MODEL.
EndpointConfig endpoint_from_env(std::string_view prefix);

/// POST {url}/chat/completions. Images given by content-store ref or file
/// path are inlined as base64 data URLs; http(s) refs are passed through.
class HttpChatBackend final : public ChatBackend {
 public:
  HttpChatBackend(EndpointConfig config, std::shared_ptr<const ContentStore> store);
  std::string complete(const ChatRequest& request) override;

 private:
  EndpointConfig config_;
  std::shared_ptr<const ContentStore> store_;
};

/// POST {url}/images/generations with response_format b64_json.
class HttpImageBackend final : public ImageBackend {
 public:
  explicit HttpImageBackend(EndpointConfig config);
  std::string generate(const GenerationRequest& request) override;

 private:
  EndpointConfig config_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;

  /// Delay before retry number `retry` (1-based).
  std::chrono::milliseconds delay(int retry) const;
};

using SleepFn = std::function<void(std::chrono::milliseconds)>;

struct ClientOptions {
  RetryPolicy retry;
  std::optional<std::filesystem::path> cache_dir;
  int max_inflight = 8;
  SleepFn sleep;  // defaults to std::this_thread::sleep_for
};

class ChatClient {
 public:
  ChatClient(std::shared_ptr<ChatBackend> backend, ClientOptions options = {});

  std::string chat(const ChatRequest& request);

  int backend_calls() const noexcept { return backend_calls_.load(); }
  int cache_hits() const noexcept { return cache_hits_.load(); }

 private:
  std::shared_ptr<ChatBackend> backend_;
  ClientOptions options_;
  ResponseCache cache_;
  InflightLimiter limiter_;
  std::atomic<int> backend_calls_{0};
  std::atomic<int> cache_hits_{0};
};

class ImageClient {
 public:
  ImageClient(std::shared_ptr<ImageBackend> backend, std::shared_ptr<ContentStore> store,
              ClientOptions options = {});

  /// Stores the image and returns its content ref.
  std::string generate_image(const GenerationRequest& request);

  int backend_calls() const noexcept { return backend_calls_.load(); }
  const std::shared_ptr<ContentStore>& store() const noexcept { return store_; }

 private:
  std::shared_ptr<ImageBackend> backend_;
  std::shared_ptr<ContentStore> store_;
  ClientOptions options_;
  ResponseCache cache_;
  InflightLimiter limiter_;
  std::atomic<int> backend_calls_{0};
};

/// Replaces every occurrence of `secret` (if non-empty) with "***".
std::string redact(std::string text, std::string_view secret);

}  // namespace inkeval
