#include <chatterbox/errors.hpp>
#include <chatterbox/http_util.hpp>

#include <httplib.h>

namespace chatterbox::http {

Url parse_url(const std::string& url) {
  Url u;
  auto sep = url.find("://");
  if (sep == std::string::npos) throw ConfigError("url without scheme: " + url);
  u.scheme = url.substr(0, sep);
  if (u.scheme != "http") throw ConfigError("only http:// endpoints are supported: " + url);
  auto rest = url.substr(sep + 3);
  auto slash = rest.find('/');
  auto hostport = rest.substr(0, slash);
  u.path = slash == std::string::npos ? "/" : rest.substr(slash);
  auto colon = hostport.rfind(':');
  if (colon != std::string::npos) {
    u.host = hostport.substr(0, colon);
    try {
      u.port = std::stoi(hostport.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad port in url: " + url);
    }
  } else {
    u.host = hostport;
  }
  if (u.host.empty()) throw ConfigError("url without host: " + url);
  return u;
}

std::string post_json(const std::string& url, const std::string& body, std::chrono::seconds timeout) {
  auto u = parse_url(url);
  httplib::Client cli(u.host, u.port);
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  auto res = cli.Post(u.path, body, "application/json");
  if (!res) throw BackendUnavailable(url + ": " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw BackendUnavailable(url + ": HTTP " + std::to_string(res->status));
  return res->body;
}

}  // namespace chatterbox::http
