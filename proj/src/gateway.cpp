#include "inkeval/gateway.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "inkeval/hashing.hpp"
#include "inkeval/net.hpp"

namespace inkeval {

namespace fs = std::filesystem;

void ChatRequest::check() const {
  if (messages.empty()) throw Error(ErrorKind::InvalidValue, "chat request has no messages");
  for (const auto& m : messages) {
    if (m.role != "system" && m.role != "user" && m.role != "assistant") {
      throw Error(ErrorKind::InvalidValue, "unknown chat role '" + m.role + "'");
    }
  }
  if (!(temperature >= 0.0)) throw Error(ErrorKind::InvalidValue, "temperature must be >= 0");
}

std::string_view to_string(Aspect a) {
  switch (a) {
    case Aspect::Hanging: return "hanging";
    case Aspect::Square: return "square";
    case Aspect::Handscroll: return "handscroll";
    case Aspect::Free: return "free";
  }
  return "free";
}

std::optional<Aspect> aspect_from_string(std::string_view text) {
  for (Aspect a : {Aspect::Hanging, Aspect::Square, Aspect::Handscroll, Aspect::Free}) {
    if (to_string(a) == text) return a;
  }
  return std::nullopt;
}

void GenerationRequest::check() const {
  if (prompt.empty()) throw Error(ErrorKind::InvalidValue, "generation prompt is empty");
}

Json canonical_json(const ChatRequest& r) {
  Json msgs = Json::array();
  for (const auto& m : r.messages) {
    Json jm{{"role", m.role}, {"text", m.text}};
    jm["image_ref"] = m.image_ref ? Json(*m.image_ref) : Json(nullptr);
    msgs.push_back(std::move(jm));
  }
  Json j{{"kind", "chat"}, {"model", r.model_id}, {"temperature", r.temperature}};
  j["seed"] = r.seed ? Json(*r.seed) : Json(nullptr);
  j["messages"] = std::move(msgs);
  return j;
}

Json canonical_json(const GenerationRequest& r) {
  Json j{{"kind", "image"},
         {"model", r.model_id},
         {"prompt", r.prompt},
         {"aspect", std::string(to_string(r.aspect))}};
  j["seed"] = r.seed ? Json(*r.seed) : Json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  thread_local std::mt19937_64 rng{std::random_device{}()};
  const fs::path tmp = path.string() + ".tmp-" + std::to_string(rng());
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::IoFailure, "cannot rename into " + path.string());
  }
}

namespace {

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

constexpr std::string_view kRefPrefix = "sha256:";

}  // namespace

ContentStore::ContentStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot create content store " + root_.string());
}

fs::path ContentStore::path_of(std::string_view ref) const {
  if (!ref.starts_with(kRefPrefix)) return fs::path(std::string(ref));
  const std::string hex(ref.substr(kRefPrefix.size()));
  if (hex.size() < 3) throw Error(ErrorKind::InvalidValue, "bad content ref " + std::string(ref));
  return root_ / hex.substr(0, 2) / hex;
}

std::string ContentStore::put(std::string_view bytes) {
  std::string ref = std::string(kRefPrefix) + sha256_hex(bytes);
  const fs::path p = path_of(ref);
  if (!fs::exists(p)) write_file_atomic(p, bytes);
  return ref;
}

std::string ContentStore::get(std::string_view ref) const {
  auto bytes = read_file(path_of(ref));
  if (!bytes) throw Error(ErrorKind::IoFailure, "image '" + std::string(ref) + "' not readable");
  return std::move(*bytes);
}

bool ContentStore::contains(std::string_view ref) const { return fs::exists(path_of(ref)); }

ResponseCache::ResponseCache(std::optional<fs::path> dir) : dir_(std::move(dir)) {}

std::optional<std::string> ResponseCache::get(const std::string& key) {
  {
    std::lock_guard lock(mu_);
    if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  }
  if (!dir_) return std::nullopt;
  auto bytes = read_file(*dir_ / (key + ".json"));
  if (!bytes) return std::nullopt;
  std::lock_guard lock(mu_);
  memory_.emplace(key, *bytes);
  return bytes;
}

void ResponseCache::put(const std::string& key, const std::string& value) {
  if (dir_) write_file_atomic(*dir_ / (key + ".json"), value);
  std::lock_guard lock(mu_);
  memory_.insert_or_assign(key, value);
}

// ---------------------------------------------------------------------------

EndpointConfig endpoint_from_env(std::string_view prefix) {
  auto env = [&](const char* suffix) {
    const std::string name = std::string(prefix) + suffix;
    const char* v = std::getenv(name.c_str());
    return v ? std::string(v) : std::string();
  };
  EndpointConfig c;
  c.url = env("_URL");
  c.api_key = env("_KEY");
  c.model = env("_MODEL");
  return c;
}

std::string redact(std::string text, std::string_view secret) {
  if (secret.empty()) return text;
  for (std::size_t pos = text.find(secret); pos != std::string::npos;
       pos = text.find(secret, pos + 3)) {
    text.replace(pos, secret.size(), "***");
  }
  return text;
}

namespace {

std::string_view mime_of(std::string_view bytes) {
  if (bytes.starts_with("\x89PNG")) return "image/png";
  if (bytes.starts_with("\xFF\xD8")) return "image/jpeg";
  if (bytes.starts_with("P5") || bytes.starts_with("P2")) return "image/x-portable-graymap";
  if (bytes.starts_with("RIFF")) return "image/webp";
  return "application/octet-stream";
}

void require_configured(const EndpointConfig& c, const char* role) {
  if (c.url.empty()) {
    throw Error(ErrorKind::EndpointUnavailable, std::string("no ") + role + " endpoint configured");
  }
}

// Maps an HTTP outcome onto the gateway's error kinds; returns on 200.
void check_status(const net::HttpResult& res, const std::string& what) {
  if (res.status == 0) throw TransientFailure(what + ": " + res.error);
  if (res.status == 200) return;
  const std::string detail = what + ": HTTP " + std::to_string(res.status);
  if (res.status == 401 || res.status == 403) throw Error(ErrorKind::AuthError, detail);
  if (res.status == 429 || res.status >= 500) throw TransientFailure(detail);
  throw Error(ErrorKind::RequestRejected, detail + " " + res.body.substr(0, 200));
}

net::Headers auth_headers(const EndpointConfig& c) {
  net::Headers h;
  if (!c.api_key.empty()) h.emplace_back("Authorization", "Bearer " + c.api_key);
  return h;
}

Json parse_reply(const std::string& body, const std::string& what) {
  try {
    return Json::parse(body);
  } catch (const Json::exception&) {
    throw Error(ErrorKind::ResponseEmpty, what + ": reply is not JSON");
  }
}

}  // namespace

HttpChatBackend::HttpChatBackend(EndpointConfig config, std::shared_ptr<const ContentStore> store)
    : config_(std::move(config)), store_(std::move(store)) {}

std::string HttpChatBackend::complete(const ChatRequest& request) {
  require_configured(config_, "chat");
  const auto url = net::split_url(config_.url);
  Json msgs = Json::array();
  for (const auto& m : request.messages) {
    if (!m.image_ref) {
      msgs.push_back(Json{{"role", m.role}, {"content", m.text}});
      continue;
    }
    std::string image_url = *m.image_ref;
    if (!image_url.starts_with("http://") && !image_url.starts_with("https://")) {
      const std::string bytes = store_ ? store_->get(image_url)
                                       : ContentStore(fs::temp_directory_path()).get(image_url);
      image_url = "data:" + std::string(mime_of(bytes)) + ";base64," + base64_encode(bytes);
    }
    Json parts = Json::array();
    parts.push_back(Json{{"type", "image_url"}, {"image_url", Json{{"url", image_url}}}});
    parts.push_back(Json{{"type", "text"}, {"text", m.text}});
    msgs.push_back(Json{{"role", m.role}, {"content", std::move(parts)}});
  }
  Json body{{"model", request.model_id.empty() ? config_.model : request.model_id},
            {"messages", std::move(msgs)},
            {"temperature", request.temperature}};
  if (request.seed) body["seed"] = *request.seed;
  if (config_.verbose) {
    spdlog::info("chat request -> {}: {}", config_.url,
                 redact(canonical_json(request).dump(), config_.api_key));
  }
  const auto res = net::post_json(url, "/chat/completions", body.dump(), auth_headers(config_),
                                  config_.timeout);
  check_status(res, "chat " + config_.url);
  if (config_.verbose) spdlog::info("chat reply: {}", redact(res.body, config_.api_key));

  const Json reply = parse_reply(res.body, "chat");
  std::string text;
  try {
    const auto& content = reply.at("choices").at(0).at("message").at("content");
    if (content.is_string()) {
      text = content.get<std::string>();
    } else if (content.is_array()) {
      for (const auto& part : content) {
        if (part.value("type", "") == "text") text += part.value("text", "");
      }
    }
  } catch (const Json::exception&) {
    throw Error(ErrorKind::ResponseEmpty, "chat reply has no choices[0].message.content");
  }
  if (text.empty()) throw Error(ErrorKind::ResponseEmpty, "chat reply content is empty");
  return text;
}

HttpImageBackend::HttpImageBackend(EndpointConfig config) : config_(std::move(config)) {}

std::string HttpImageBackend::generate(const GenerationRequest& request) {
  require_configured(config_, "text-to-image");
  const auto url = net::split_url(config_.url);
  static constexpr auto size_for = [](Aspect a) {
    switch (a) {
      case Aspect::Hanging: return "1024x1536";
      case Aspect::Handscroll: return "1536x1024";
      default: return "1024x1024";
    }
  };
  Json body{{"model", request.model_id.empty() ? config_.model : request.model_id},
            {"prompt", request.prompt},
            {"n", 1},
            {"size", size_for(request.aspect)},
            {"response_format", "b64_json"}};
  if (request.seed) body["seed"] = *request.seed;
  if (config_.verbose) {
    spdlog::info("image request -> {}: {}", config_.url,
                 redact(canonical_json(request).dump(), config_.api_key));
  }
  const auto res = net::post_json(url, "/images/generations", body.dump(), auth_headers(config_),
                                  config_.timeout);
  check_status(res, "image " + config_.url);
  const Json reply = parse_reply(res.body, "image");
  std::string b64;
  try {
    b64 = reply.at("data").at(0).at("b64_json").get<std::string>();
  } catch (const Json::exception&) {
    throw Error(ErrorKind::ResponseEmpty, "image reply has no data[0].b64_json");
  }
  std::string bytes = base64_decode(b64);
  if (bytes.empty()) throw Error(ErrorKind::ResponseEmpty, "image reply decoded to zero bytes");
  return bytes;
}

// ---------------------------------------------------------------------------

std::chrono::milliseconds RetryPolicy::delay(int retry) const {
  const double ms = static_cast<double>(base_delay.count()) * std::pow(factor, retry - 1);
  return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

namespace {

template <typename Fn>
std::string with_retry(const ClientOptions& options, const std::string& what, Fn&& fn) {
  const int attempts = std::max(options.retry.max_attempts, 1);
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const TransientFailure& e) {
      if (attempt >= attempts) {
        throw Error(ErrorKind::EndpointUnavailable,
                    what + " failed after " + std::to_string(attempts) + " attempts: " + e.detail());
      }
      const auto wait = options.retry.delay(attempt);
      spdlog::warn("{}: attempt {} failed ({}); retrying in {} ms", what, attempt, e.detail(),
                   wait.count());
      if (options.sleep) {
        options.sleep(wait);
      } else {
        std::this_thread::sleep_for(wait);
      }
    }
  }
}

}  // namespace

ChatClient::ChatClient(std::shared_ptr<ChatBackend> backend, ClientOptions options)
    : backend_(std::move(backend)),
      options_(std::move(options)),
      cache_(options_.cache_dir ? std::optional<fs::path>(*options_.cache_dir / "chat")
                                : std::nullopt),
      limiter_(options_.max_inflight) {}

std::string ChatClient::chat(const ChatRequest& request) {
  request.check();
  const std::string key = sha256_hex(canonical_json(request).dump());
  if (auto hit = cache_.get(key)) {
    ++cache_hits_;
    return *hit;
  }
  std::string text = with_retry(options_, "chat", [&] {
    InflightLimiter::Permit permit(limiter_);
    ++backend_calls_;
    return backend_->complete(request);
  });
  cache_.put(key, text);
  return text;
}

ImageClient::ImageClient(std::shared_ptr<ImageBackend> backend, std::shared_ptr<ContentStore> store,
                         ClientOptions options)
    : backend_(std::move(backend)),
      store_(std::move(store)),
      options_(std::move(options)),
      cache_(options_.cache_dir ? std::optional<fs::path>(*options_.cache_dir / "image")
                                : std::nullopt),
      limiter_(options_.max_inflight) {}

std::string ImageClient::generate_image(const GenerationRequest& request) {
  request.check();
  const std::string key = sha256_hex(canonical_json(request).dump());
  if (auto hit = cache_.get(key); hit && store_->contains(*hit)) return *hit;
  const std::string bytes = with_retry(options_, "generate_image", [&] {
    InflightLimiter::Permit permit(limiter_);
    ++backend_calls_;
    return backend_->generate(request);
  });
  std::string ref = store_->put(bytes);
  cache_.put(key, ref);
  return ref;
}

}  // namespace inkeval
