#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace ragebench::detail {

struct Endpoint {
  std::string origin;  // scheme://host:port
  std::string path;    // always starts with '/'
};

Endpoint parse_endpoint(const std::string& url);

/// POST a structured body and parse the structured reply. Retries transport
/// failures and 5xx replies; throws TransportError carrying the attempt count.
nlohmann::json post_json(const std::string& url, const nlohmann::json& body, double timeout_s,
                         int retries);

}  // namespace ragebench::detail
