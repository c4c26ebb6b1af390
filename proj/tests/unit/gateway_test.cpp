#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include "inkeval/error.hpp"
#include "inkeval/gateway.hpp"
#include "inkeval/hashing.hpp"
#include "test_server.hpp"

using namespace inkeval;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("inkeval_gw_" + name + "_" +
                                                  std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ChatRequest simple_chat(const std::string& text) {
  ChatRequest r;
  r.messages.push_back({"user", text, std::nullopt});
  r.model_id = "vlm-test";
  return r;
}

std::string chat_reply(const std::string& content) {
  return Json{{"choices", Json::array({Json{{"message", Json{{"role", "assistant"},
                                                             {"content", content}}}}})}}
      .dump();
}

// Fails the first `failures` calls with a transient error.
class FlakyBackend : public ChatBackend {
 public:
  explicit FlakyBackend(int failures) : failures_(failures) {}
  std::string complete(const ChatRequest& r) override {
    if (calls_++ < failures_) throw TransientFailure("boom");
    return "ok:" + r.messages.back().text;
  }
  int calls() const { return calls_; }

 private:
  int failures_;
  std::atomic<int> calls_{0};
};

ClientOptions no_sleep(std::vector<std::chrono::milliseconds>* waits = nullptr) {
  ClientOptions o;
  o.sleep = [waits](std::chrono::milliseconds d) {
    if (waits) waits->push_back(d);
  };
  return o;
}

}  // namespace

TEST(ChatRequest, Validation) {
  EXPECT_THROW(ChatRequest{}.check(), Error);
  auto r = simple_chat("hi");
  r.messages[0].role = "tool";
  EXPECT_THROW(r.check(), Error);
  r = simple_chat("hi");
  r.temperature = -0.5;
  EXPECT_THROW(r.check(), Error);
  EXPECT_NO_THROW(simple_chat("hi").check());
}

TEST(CanonicalJson, StableAndSensitive) {
  const auto a = simple_chat("hello");
  auto b = simple_chat("hello");
  EXPECT_EQ(canonical_json(a).dump(), canonical_json(b).dump());
  b.seed = 3;
  EXPECT_NE(canonical_json(a).dump(), canonical_json(b).dump());
  GenerationRequest g{"ink bamboo", Aspect::Hanging, "t2i", 7};
  EXPECT_EQ(canonical_json(g)["aspect"], "hanging");
}

TEST(RetryPolicy, ExponentialDelays) {
  RetryPolicy p;
  EXPECT_EQ(p.delay(1).count(), 1000);
  EXPECT_EQ(p.delay(2).count(), 2000);
  EXPECT_EQ(p.delay(4).count(), 8000);
}

TEST(ChatClient, RetriesTransientThenSucceeds) {
  auto backend = std::make_shared<FlakyBackend>(3);
  std::vector<std::chrono::milliseconds> waits;
  ChatClient client(backend, no_sleep(&waits));
  EXPECT_EQ(client.chat(simple_chat("x")), "ok:x");
  EXPECT_EQ(backend->calls(), 4);
  ASSERT_EQ(waits.size(), 3u);
  EXPECT_EQ(waits[0].count(), 1000);
  EXPECT_EQ(waits[2].count(), 4000);
}

TEST(ChatClient, GivesUpAfterMaxAttempts) {
  auto backend = std::make_shared<FlakyBackend>(100);
  ChatClient client(backend, no_sleep());
  try {
    client.chat(simple_chat("x"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EndpointUnavailable);
  }
  EXPECT_EQ(backend->calls(), 5);
}

TEST(ChatClient, CachesIdenticalRequests) {
  auto backend = std::make_shared<FlakyBackend>(0);
  ChatClient client(backend, no_sleep());
  EXPECT_EQ(client.chat(simple_chat("a")), "ok:a");
  EXPECT_EQ(client.chat(simple_chat("a")), "ok:a");
  EXPECT_EQ(client.chat(simple_chat("b")), "ok:b");
  EXPECT_EQ(client.backend_calls(), 2);
  EXPECT_EQ(client.cache_hits(), 1);
}

TEST(ChatClient, DiskCacheSurvivesRestart) {
  const auto dir = scratch("cache");
  auto opts = no_sleep();
  opts.cache_dir = dir;
  {
    ChatClient client(std::make_shared<FlakyBackend>(0), opts);
    client.chat(simple_chat("persist"));
  }
  auto backend = std::make_shared<FlakyBackend>(0);
  ChatClient client(backend, opts);
  EXPECT_EQ(client.chat(simple_chat("persist")), "ok:persist");
  EXPECT_EQ(backend->calls(), 0);
  fs::remove_all(dir);
}

TEST(ContentStore, PutGetDedup) {
  const auto dir = scratch("store");
  ContentStore store(dir);
  const auto ref = store.put("abc");
  EXPECT_EQ(ref, "sha256:" + sha256_hex("abc"));
  EXPECT_EQ(store.put("abc"), ref);
  EXPECT_TRUE(store.contains(ref));
  EXPECT_EQ(store.get(ref), "abc");
  EXPECT_THROW(store.get("sha256:" + sha256_hex("missing")), Error);
  fs::remove_all(dir);
}

TEST(Redact, HidesSecret) {
  EXPECT_EQ(redact("key=sk-1 and sk-1", "sk-1"), "key=*** and ***");
  EXPECT_EQ(redact("nothing", ""), "nothing");
}

TEST(HttpChatBackend, Unconfigured) {
  HttpChatBackend b(EndpointConfig{}, nullptr);
  try {
    b.complete(simple_chat("x"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EndpointUnavailable);
  }
}

TEST(HttpChatBackend, RoundTripWithImageAndAuth) {
  const auto dir = scratch("http_chat");
  auto store = std::make_shared<ContentStore>(dir);
  const auto ref = store->put("P5\n1 1\n255\n\x01");
  testing_support::TestServer srv;
  Json seen;
  std::string auth;
  srv.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = Json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(chat_reply("评分：4"), "application/json");
  });
  srv.start();
  EndpointConfig cfg;
  cfg.url = srv.url("/v1");
  cfg.api_key = "sk-test";
  HttpChatBackend b(cfg, store);
  auto req = simple_chat("rate it");
  req.messages[0].image_ref = ref;
  req.seed = 11;
  EXPECT_EQ(b.complete(req), "评分：4");
  EXPECT_EQ(auth, "Bearer sk-test");
  EXPECT_EQ(seen["model"], "vlm-test");
  EXPECT_EQ(seen["seed"], 11);
  const auto& parts = seen["messages"][0]["content"];
  ASSERT_TRUE(parts.is_array());
  EXPECT_TRUE(parts[0]["image_url"]["url"].get<std::string>().starts_with(
      "data:image/x-portable-graymap;base64,"));
  EXPECT_EQ(parts[1]["text"], "rate it");
  fs::remove_all(dir);
}

TEST(HttpChatBackend, StatusMapping) {
  testing_support::TestServer srv;
  std::atomic<int> status{401};
  srv.server().Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    res.status = status.load();
    res.set_content(status == 200 ? chat_reply("") : "{}", "application/json");
  });
  srv.start();
  EndpointConfig cfg;
  cfg.url = srv.url();
  HttpChatBackend b(cfg, nullptr);
  auto kind_of = [&] {
    try {
      b.complete(simple_chat("x"));
    } catch (const TransientFailure&) {
      return std::string("transient");
    } catch (const Error& e) {
      return std::string(to_string(e.kind()));
    }
    return std::string("ok");
  };
  EXPECT_EQ(kind_of(), "AuthError");
  status = 400;
  EXPECT_EQ(kind_of(), "RequestRejected");
  status = 503;
  EXPECT_EQ(kind_of(), "transient");
  status = 429;
  EXPECT_EQ(kind_of(), "transient");
  status = 200;
  EXPECT_EQ(kind_of(), "ResponseEmpty");
}

TEST(HttpChatBackend, ClientRetriesServerErrors) {
  testing_support::TestServer srv;
  std::atomic<int> hits{0};
  srv.server().Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    if (hits++ < 2) {
      res.status = 500;
      return;
    }
    res.set_content(chat_reply("fine"), "application/json");
  });
  srv.start();
  EndpointConfig cfg;
  cfg.url = srv.url();
  ChatClient client(std::make_shared<HttpChatBackend>(cfg, nullptr), no_sleep());
  EXPECT_EQ(client.chat(simple_chat("x")), "fine");
  EXPECT_EQ(hits.load(), 3);
}

TEST(HttpChatBackend, UnreachableIsTransient) {
  EndpointConfig cfg;
  cfg.url = "http://127.0.0.1:1";
  cfg.timeout = std::chrono::milliseconds(500);
  HttpChatBackend b(cfg, nullptr);
  EXPECT_THROW(b.complete(simple_chat("x")), TransientFailure);
}

TEST(HttpImageBackend, DecodesAndStores) {
  testing_support::TestServer srv;
  Json seen;
  srv.server().Post("/images/generations", [&](const httplib::Request& req, httplib::Response& res) {
    seen = Json::parse(req.body);
    Json reply{{"data", Json::array({Json{{"b64_json", base64_encode("PIXELS")}}})}};
    res.set_content(reply.dump(), "application/json");
  });
  srv.start();
  EndpointConfig cfg;
  cfg.url = srv.url();
  cfg.model = "t2i-default";
  const auto dir = scratch("http_image");
  auto store = std::make_shared<ContentStore>(dir);
  ImageClient client(std::make_shared<HttpImageBackend>(cfg), store, no_sleep());
  const auto ref = client.generate_image({"plum blossom", Aspect::Handscroll, "", 5});
  EXPECT_EQ(store->get(ref), "PIXELS");
  EXPECT_EQ(seen["model"], "t2i-default");
  EXPECT_EQ(seen["size"], "1536x1024");
  EXPECT_EQ(seen["response_format"], "b64_json");
  EXPECT_EQ(client.generate_image({"plum blossom", Aspect::Handscroll, "", 5}), ref);
  EXPECT_EQ(client.backend_calls(), 1);
  fs::remove_all(dir);
}

TEST(EndpointFromEnv, ReadsPrefixedVariables) {
  ::setenv("INKTEST_URL", "http://x", 1);
  ::setenv("INKTEST_MODEL", "m", 1);
  ::unsetenv("INKTEST_KEY");
  const auto c = endpoint_from_env("INKTEST");
  EXPECT_EQ(c.url, "http://x");
  EXPECT_EQ(c.model, "m");
  EXPECT_TRUE(c.api_key.empty());
}
