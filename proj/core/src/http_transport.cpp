#include "http_transport.hpp"

#include <chrono>
#include <thread>

#include "httplib.h"
#include "ragebench/errors.hpp"

namespace ragebench::detail {

Endpoint parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ArgumentError("endpoint '" + url + "' has no scheme");
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = url.substr(0, path_start);
  e.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  return e;
}

nlohmann::json post_json(const std::string& url, const nlohmann::json& body, double timeout_s,
                         int retries) {
  const Endpoint endpoint = parse_endpoint(url);
  const auto seconds = static_cast<time_t>(timeout_s);
  const auto micros = static_cast<time_t>((timeout_s - static_cast<double>(seconds)) * 1e6);
  const std::string payload = body.dump();
  std::string last_error;
  const int attempts = retries + 1;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    httplib::Client client(endpoint.origin);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);
    auto res = client.Post(endpoint.path, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
    } else if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
    } else if (res->status >= 400) {
      throw TransportError(url + " rejected the request: HTTP " + std::to_string(res->status) + " " +
                               res->body.substr(0, 200),
                           attempt);
    } else {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error& e) {
        throw ProviderContractError(url + " returned a malformed body: " + e.what());
      }
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
    }
  }
  throw TransportError(url + " unreachable after " + std::to_string(attempts) +
                           " attempt(s): " + last_error,
                       attempts);
}

}  // namespace ragebench::detail
