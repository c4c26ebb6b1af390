#include "inkeval/net.hpp"

#include <httplib.h>

#include "inkeval/error.hpp"

namespace inkeval::net {

Url split_url(std::string_view url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error(ErrorKind::InvalidValue, "URL '" + std::string(url) + "' has no scheme");
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorKind::InvalidValue, "URL scheme '" + std::string(scheme) + "' unsupported");
  }
  const std::size_t host_begin = scheme_end + 3;
  const std::size_t path_begin = url.find('/', host_begin);
  if (path_begin == host_begin) {
    throw Error(ErrorKind::InvalidValue, "URL '" + std::string(url) + "' has no host");
  }
  Url out;
  out.origin = std::string(url.substr(0, path_begin));
  if (path_begin != std::string_view::npos) out.path = std::string(url.substr(path_begin));
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

namespace {

httplib::Headers to_headers(const Headers& headers) {
  httplib::Headers out;
  for (const auto& [k, v] : headers) out.emplace(k, v);
  return out;
}

void configure(httplib::Client& client, std::chrono::milliseconds timeout) {
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
}

HttpResult finish(const httplib::Result& res) {
  HttpResult out;
  if (!res) {
    out.error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  return out;
}

}  // namespace

HttpResult post_json(const Url& base, std::string_view path, const std::string& body,
                     const Headers& headers, std::chrono::milliseconds timeout) {
  httplib::Client client(base.origin);
  configure(client, timeout);
  const std::string full = base.path + std::string(path);
  return finish(client.Post(full, to_headers(headers), body, "application/json"));
}

HttpResult get(const Url& base, std::string_view path, const Headers& headers,
               std::chrono::milliseconds timeout) {
  httplib::Client client(base.origin);
  configure(client, timeout);
  const std::string full = base.path + std::string(path);
  return finish(client.Get(full, to_headers(headers)));
}

}  // namespace inkeval::net
