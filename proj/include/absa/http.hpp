#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace absa::http {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'
};

// Throws std::invalid_argument for anything that is not http(s)://host[:port][/path].
Url parse_url(const std::string& url);

struct Response {
  // HTTP status, or 0 when no response arrived (connect failure, timeout).
  int status = 0;
  std::string body;
  // Transport error text when status == 0.
  std::string error;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

Response post_json(const Url& url, const std::string& body, const Headers& headers,
                   std::chrono::milliseconds timeout);

}  // namespace absa::http
