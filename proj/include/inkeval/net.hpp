#pragma once

// Thin HTTP layer so that only one translation unit pulls in cpp-httplib.

#include <chrono>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace inkeval::net {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash, may be empty
};

/// Throws Error(InvalidValue) for URLs without an http(s) scheme or host.
Url split_url(std::string_view url);

struct HttpResult {
  int status = 0;        // 0 when no response arrived
  std::string body;
  std::string error;     // transport error description when status == 0
};

using Headers = std::vector<std::pair<std::string, std::string>>;

HttpResult post_json(const Url& base, std::string_view path, const std::string& body,
                     const Headers& headers, std::chrono::milliseconds timeout);

HttpResult get(const Url& base, std::string_view path, const Headers& headers,
               std::chrono::milliseconds timeout);

}  // namespace inkeval::net
