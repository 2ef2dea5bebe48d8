#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "ragebench/telemetry.hpp"

namespace ragebench {

/// The config schema document built into the library.
std::string_view published_config_schema();

struct ServiceOptions {
  /// Where sessions not started by this server are looked up, and the base
  /// for relative paths inside posted payloads.
  std::filesystem::path base_dir = ".";
  std::filesystem::path default_output_dir = "ragebench-out";
  /// Shared by every session run by this server; SystemProbe when null.
  ResourceProbe* probe = nullptr;
  int sse_keepalive_ms = 1000;
};

/// HTTP front end over the orchestrator. One session runs at a time.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds host:port (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind.
  void listen();
  /// bind + listen on a background thread.
  int start(const std::string& host, int port);
  /// Stops the listener, cancels a running session between trials and waits for it.
  void stop();
  /// Blocks until no session is running.
  void wait_idle();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ragebench
