#include "ragebench/service.hpp"

#include <algorithm>
#include <charconv>
#include <condition_variable>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ragebench/config.hpp"
#include "ragebench/dataset.hpp"
#include "ragebench/errors.hpp"
#include "ragebench/orchestrator.hpp"
#include "ragebench_schema_text.hpp"

namespace ragebench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view published_config_schema() { return kConfigSchemaText; }

namespace {

constexpr const char* kJson = "application/json";

std::string dump(const json& j) { return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n"; }

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(dump(body), kJson);
}

void error(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, json{{"error", message}, {"status", status}});
}

void validation_error(httplib::Response& res, const std::exception& e) {
  if (auto* v = dynamic_cast<const ValidationError*>(&e)) {
    reply(res, 422, json{{"error", "validation failed"},
                         {"status", 422},
                         {"errors", json::array({{{"field", v->field()}, {"message", v->message()}}})}});
  } else if (auto* p = dynamic_cast<const ParseError*>(&e)) {
    reply(res, 400, json{{"error", p->what()}, {"status", 400}, {"offset", p->offset()}});
  } else {
    error(res, 422, e.what());
  }
}

bool terminal(SessionPhase p) { return p == SessionPhase::done || p == SessionPhase::aborted; }

json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) return nullptr;
  return json::parse(in, nullptr, false);
}

std::optional<std::size_t> query_size(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string v = req.get_param_value(key);
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec != std::errc() || ptr != v.data() + v.size() || n == 0) return std::nullopt;
  return n;
}

}  // namespace

struct Service::Impl {
  struct Entry {
    std::string id;
    fs::path output_dir;
    ExperimentConfig config;
    std::string created_at;
    std::mutex mutex;
    std::condition_variable cv;
    std::shared_ptr<const SessionState> snapshot;
    bool running = false;
  };

  ServiceOptions options;
  std::unique_ptr<SystemProbe> own_probe;
  httplib::Server server;
  std::thread listener;
  std::mutex mutex;
  std::map<std::string, std::shared_ptr<Entry>> sessions;
  std::shared_ptr<Entry> active;
  std::thread worker;
  std::atomic<bool> stopping{false};
  std::atomic<bool> cancel{false};
  std::mutex stop_mutex;

  explicit Impl(ServiceOptions opts) : options(std::move(opts)) {
    if (options.probe == nullptr) {
      own_probe = std::make_unique<SystemProbe>();
      options.probe = own_probe.get();
    }
    routes();
  }

  fs::path resolve(const fs::path& p) const { return p.is_absolute() ? p : options.base_dir / p; }

  json handle(const Entry& e, std::string_view status) const {
    const std::string base = "/sessions/" + e.id;
    return json{{"session_id", e.id},
                {"created_at", e.created_at},
                {"status", status},
                {"links",
                 {{"self", base},
                  {"progress", base + "/progress"},
                  {"results", base + "/results"},
                  {"recommendation", base + "/recommendation"},
                  {"estimate", base + "/estimate"}}}};
  }

  /// Known in memory, or found on disk under the default output dir.
  std::shared_ptr<Entry> lookup(const std::string& id) {
    std::lock_guard lock(mutex);
    if (auto it = sessions.find(id); it != sessions.end()) return it->second;
    const fs::path out = resolve(options.default_output_dir);
    const auto paths = session_paths(out, id);
    if (id.find('/') != std::string::npos || id.find("..") != std::string::npos) return nullptr;
    if (!fs::exists(paths.state) || !fs::exists(paths.config_snapshot)) return nullptr;
    auto e = std::make_shared<Entry>();
    e->id = id;
    e->output_dir = out;
    try {
      e->config = load_config_file(paths.config_snapshot);
    } catch (const std::exception&) {
      return nullptr;
    }
    json state = read_json_file(paths.state);
    e->created_at = state.is_object() ? state.value("started_at", "") : "";
    sessions[id] = e;
    return e;
  }

  json state_json(Entry& e) {
    std::lock_guard lock(e.mutex);
    if (e.snapshot) return to_json(*e.snapshot);
    return read_json_file(session_paths(e.output_dir, e.id).state);
  }

  void start_session(const ExperimentConfig& cfg, httplib::Response& res) {
    std::lock_guard lock(mutex);
    if (active) {
      error(res, 409, "session " + active->id + " is already running");
      return;
    }
    auto e = std::make_shared<Entry>();
    e->id = config_fingerprint(cfg);
    e->output_dir = resolve(cfg.output_dir);
    e->config = cfg;
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    e->created_at = buf;
    e->running = true;
    sessions[e->id] = e;
    active = e;
    if (worker.joinable()) worker.join();
    worker = std::thread([this, e] {
      OrchestratorOptions o;
      o.base_dir = options.base_dir;
      o.probe = options.probe;
      o.cancel = &cancel;
      o.on_progress = [e](std::shared_ptr<const SessionState> s) {
        std::lock_guard l(e->mutex);
        e->snapshot = std::move(s);
        e->cv.notify_all();
      };
      SessionState final_state = run_session(e->config, o);
      {
        std::lock_guard l(e->mutex);
        // Marks the running -> idle transition so streams see a fresh revision.
        if (e->snapshot) final_state.revision = std::max(final_state.revision, e->snapshot->revision) + 1;
        e->snapshot = std::make_shared<const SessionState>(std::move(final_state));
        e->running = false;
        e->cv.notify_all();
      }
      std::lock_guard l(mutex);
      active.reset();
    });
    reply(res, 202, handle(*e, "running"));
  }

  void routes() {
    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      ExperimentConfig cfg;
      try {
        cfg = validate_config(req.body);
      } catch (const std::exception& e) {
        validation_error(res, e);
        return;
      }
      start_session(cfg, res);
    });

    server.Post("/validate", [](const httplib::Request& req, httplib::Response& res) {
      try {
        const ExperimentConfig cfg = validate_config(req.body);
        reply(res, 200, json{{"valid", true}, {"config", config_to_json(cfg)}});
      } catch (const std::exception& e) {
        validation_error(res, e);
      }
    });

    server.Get("/schema/config", [](const httplib::Request&, httplib::Response& res) {
      res.status = 200;
      res.set_content(std::string(published_config_schema()), "application/schema+json");
    });

    server.Get("/registry/datasets", [](const httplib::Request&, httplib::Response& res) {
      json list = json::array();
      for (const auto& d : dataset_registry()) {
        list.push_back({{"name", d.name},
                        {"source", d.source},
                        {"approx_size", d.approx_size},
                        {"train_size", d.train_size},
                        {"question_type", d.question_type},
                        {"access_url", d.access_url}});
      }
      reply(res, 200, json{{"datasets", std::move(list)}});
    });

    server.Get("/sessions/:id", [this](const httplib::Request& req, httplib::Response& res) {
      auto e = lookup(req.path_params.at("id"));
      if (!e) return error(res, 404, "unknown session");
      json state = state_json(*e);
      const std::string phase = state.is_object() ? state.value("phase", "planning") : "planning";
      json body = handle(*e, phase);
      body["state"] = std::move(state);
      reply(res, 200, body);
    });

    server.Get("/sessions/:id/progress", [this](const httplib::Request& req, httplib::Response& res) {
      auto e = lookup(req.path_params.at("id"));
      if (!e) return error(res, 404, "unknown session");
      auto last = std::make_shared<std::uint64_t>(0);
      auto first = std::make_shared<bool>(true);
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream", [this, e, last, first](std::size_t, httplib::DataSink& sink) {
            std::unique_lock lock(e->mutex);
            if (!*first) {
              e->cv.wait_for(lock, std::chrono::milliseconds(options.sse_keepalive_ms), [&] {
                return stopping.load() || !e->running || (e->snapshot && e->snapshot->revision != *last);
              });
            }
            if (stopping) {
              sink.done();
              return true;
            }
            json state;
            bool is_terminal = false;
            if (e->snapshot) {
              const bool finished = terminal(e->snapshot->phase) && !e->running;
              // The final snapshot may repeat the last revision; it still ends the stream.
              if (!*first && e->snapshot->revision == *last && !finished) {
                lock.unlock();
                const std::string ping = ": keepalive\n\n";
                return sink.write(ping.data(), ping.size());
              }
              *last = e->snapshot->revision;
              state = to_json(*e->snapshot);
              is_terminal = finished;
            } else {
              state = read_json_file(session_paths(e->output_dir, e->id).state);
              is_terminal = true;
            }
            *first = false;
            lock.unlock();
            const std::string event = std::string("event: ") + (is_terminal ? "done" : "state") +
                                      "\ndata: " + state.dump(-1, ' ', false, json::error_handler_t::replace) +
                                      "\n\n";
            if (!sink.write(event.data(), event.size())) return false;
            if (is_terminal) sink.done();
            return true;
          });
    });

    server.Get("/sessions/:id/results", [this](const httplib::Request& req, httplib::Response& res) {
      auto e = lookup(req.path_params.at("id"));
      if (!e) return error(res, 404, "unknown session");
      const auto page = query_size(req, "page", 1);
      const auto page_size = query_size(req, "page_size", 50);
      if (!page || !page_size || *page_size > 1000) {
        return error(res, 400, "page and page_size must be positive integers (page_size <= 1000)");
      }
      std::vector<TrialRecord> records;
      try {
        records = load_session_records(e->output_dir, e->id);
      } catch (const NotFoundError&) {
        records.clear();
      }
      const std::size_t total = records.size();
      const std::size_t pages = (total + *page_size - 1) / *page_size;
      json items = json::array();
      for (std::size_t i = (*page - 1) * *page_size; i < total && i < *page * *page_size; ++i) {
        items.push_back(to_json(records[i]));
      }
      reply(res, 200, json{{"session_id", e->id},
                           {"page", *page},
                           {"page_size", *page_size},
                           {"total", total},
                           {"pages", pages},
                           {"records", std::move(items)}});
    });

    server.Get("/sessions/:id/recommendation", [this](const httplib::Request& req, httplib::Response& res) {
      auto e = lookup(req.path_params.at("id"));
      if (!e) return error(res, 404, "unknown session");
      {
        std::lock_guard lock(e->mutex);
        if (e->running || (e->snapshot && !terminal(e->snapshot->phase))) {
          return error(res, 409, "recommendation is available once the session has been aggregated");
        }
      }
      json rec = read_json_file(session_paths(e->output_dir, e->id).recommendation);
      if (rec.is_null() || rec.is_discarded()) return error(res, 404, "session produced no recommendation");
      reply(res, 200, rec);
    });

    server.Get("/sessions/:id/estimate", [this](const httplib::Request& req, httplib::Response& res) {
      auto e = lookup(req.path_params.at("id"));
      if (!e) return error(res, 404, "unknown session");
      {
        std::lock_guard lock(mutex);
        if (active) return error(res, 409, "cannot estimate while a session is running");
      }
      try {
        OrchestratorOptions o;
        o.base_dir = options.base_dir;
        o.probe = options.probe;
        const SessionEstimate est = estimate_session(e->config, o);
        reply(res, 200, json{{"session_id", e->id},
                             {"seconds", est.seconds},
                             {"per_line_seconds", est.per_line_seconds},
                             {"source", est.source},
                             {"instances", est.instances},
                             {"combinations", est.combinations},
                             {"skipped", est.skipped}});
      } catch (const std::exception& ex) {
        error(res, 500, ex.what());
      }
    });
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void Service::listen() { impl_->server.listen_after_bind(); }

int Service::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  if (bound < 0) throw Error("cannot bind " + host);
  impl_->listener = std::thread([this] { listen(); });
  impl_->server.wait_until_ready();
  return bound;
}

void Service::wait_idle() {
  std::shared_ptr<Impl::Entry> e;
  {
    std::lock_guard lock(impl_->mutex);
    e = impl_->active;
  }
  if (e) {
    std::unique_lock lock(e->mutex);
    e->cv.wait(lock, [&] { return !e->running; });
  }
}

void Service::stop() {
  if (!impl_) return;
  std::lock_guard stop_lock(impl_->stop_mutex);
  impl_->stopping = true;
  {
    std::lock_guard lock(impl_->mutex);
    for (auto& [id, e] : impl_->sessions) {
      std::lock_guard l(e->mutex);
      e->cv.notify_all();
    }
  }
  impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
  impl_->cancel = true;
  wait_idle();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace ragebench
