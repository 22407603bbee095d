#pragma once

#include <chrono>
#include <string>

namespace chatterbox::http {

struct Url {
  std::string scheme;
  std::string host;
  int port = 80;
  std::string path;
};

/// Parses "http://host[:port]/path". Throws ConfigError.
Url parse_url(const std::string& url);

/// POSTs a JSON body and returns the response body. Non-2xx or transport
/// failure throws BackendUnavailable.
std::string post_json(const std::string& url, const std::string& body,
                      std::chrono::seconds timeout = std::chrono::seconds(60));

}  // namespace chatterbox::http
