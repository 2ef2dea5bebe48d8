// Command line front end: run, estimate, results, recommend, serve, validate, registry.

#include <pthread.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ragebench/config.hpp"
#include "ragebench/dataset.hpp"
#include "ragebench/errors.hpp"
#include "ragebench/orchestrator.hpp"
#include "ragebench/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ragebench;

namespace {

struct Loaded {
  ExperimentConfig config;
  fs::path base_dir;
};

Loaded load(const std::string& path) {
  Loaded l{load_config_file(path), fs::absolute(path).parent_path()};
  return l;
}

void print(const json& j) { std::cout << j.dump(2, ' ', false, json::error_handler_t::replace) << "\n"; }

/// Session id and output dir from --session/--output-dir, or derived from --config.
std::pair<std::string, fs::path> session_target(const std::string& session, const std::string& output_dir,
                                                 const std::string& config_path) {
  if (!session.empty()) return {session, output_dir};
  if (config_path.empty()) throw ArgumentError("pass --session or --config");
  const Loaded l = load(config_path);
  const fs::path out = fs::path(l.config.output_dir).is_absolute() ? fs::path(l.config.output_dir)
                                                                   : l.base_dir / l.config.output_dir;
  return {config_fingerprint(l.config), out};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark RAG pipeline combinations and recommend a configuration"};
  app.require_subcommand(1);

  std::string config_path;
  std::string session;
  std::string output_dir = "ragebench-out";
  std::string out_file;
  std::optional<double> per_line;
  std::string host = "127.0.0.1";
  int port = 8080;

  auto add_config = [&](CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("--config", config_path, "Experiment configuration (JSON)")->envname("RAGEBENCH_CONFIG");
    if (required) opt->required();
  };
  auto add_session = [&](CLI::App* cmd) {
    cmd->add_option("--session", session, "Session id");
    cmd->add_option("--output-dir", output_dir, "Output directory holding sessions/")->capture_default_str();
    add_config(cmd, false);
  };

  auto* run = app.add_subcommand("run", "Run a full session");
  add_config(run, true);
  auto* estimate = app.add_subcommand("estimate", "Project the session run time");
  add_config(estimate, true);
  estimate->add_option("--per-line-seconds", per_line, "Use this per-line time instead of history or calibration");
  auto* results = app.add_subcommand("results", "Export trial records as JSON lines");
  add_session(results);
  results->add_option("--out", out_file, "Write to this file instead of stdout");
  auto* recommend = app.add_subcommand("recommend", "Print the recommendation report");
  add_session(recommend);
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--port", port, "Listen port")->envname("RAGEBENCH_PORT")->capture_default_str();
  serve->add_option("--host", host, "Listen address")->capture_default_str();
  serve->add_option("--output-dir", output_dir, "Where sessions are looked up")->capture_default_str();
  auto* validate = app.add_subcommand("validate", "Validate and print the canonical configuration");
  add_config(validate, true);
  auto* registry = app.add_subcommand("registry", "List the known benchmark datasets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const Loaded l = load(config_path);
      OrchestratorOptions o;
      o.base_dir = l.base_dir;
      o.on_progress = [](std::shared_ptr<const SessionState> s) {
        std::size_t done = 0, total = 0;
        for (const auto& p : s->progress) {
          done += p.done;
          total += p.total;
        }
        std::cerr << "\r[" << to_string(s->phase) << "] " << done << "/" << total << " trials" << std::flush;
      };
      const SessionState state = run_session(l.config, o);
      std::cerr << "\n";
      print(to_json(state));
      return state.phase == SessionPhase::done ? 0 : 1;
    }
    if (*estimate) {
      const Loaded l = load(config_path);
      OrchestratorOptions o;
      o.base_dir = l.base_dir;
      const SessionEstimate e = estimate_session(l.config, o, per_line);
      print(json{{"session_id", config_fingerprint(l.config)},
                 {"seconds", e.seconds},
                 {"per_line_seconds", e.per_line_seconds},
                 {"source", e.source},
                 {"instances", e.instances},
                 {"combinations", e.combinations},
                 {"skipped", e.skipped}});
      return 0;
    }
    if (*results) {
      const auto [id, dir] = session_target(session, output_dir, config_path);
      std::size_t n = 0;
      if (out_file.empty()) {
        n = export_results(dir, id, std::cout);
      } else {
        std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
        n = export_results(dir, id, out);
        if (!out) throw Error("cannot write " + out_file);
      }
      std::cerr << n << " records\n";
      return 0;
    }
    if (*recommend) {
      const auto [id, dir] = session_target(session, output_dir, config_path);
      const json summary = export_summary(dir, id);
      if (summary["recommendation"].is_null()) {
        std::cerr << "session " << id << " has no recommendation\n";
        return 1;
      }
      print(summary["recommendation"]);
      return 0;
    }
    if (*serve) {
      ServiceOptions so;
      so.base_dir = fs::current_path();
      so.default_output_dir = output_dir;
      // SIGINT/SIGTERM are taken synchronously by a watcher thread.
      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);
      Service service(so);
      std::thread([&service, signals] {
        int sig = 0;
        sigwait(&signals, &sig);
        service.stop();
      }).detach();
      const int bound = service.bind(host, port);
      if (bound < 0) throw Error("cannot bind " + host);
      std::cerr << "listening on http://" << host << ":" << bound << "\n";
      service.listen();
      service.stop();
      return 0;
    }
    if (*validate) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) throw NotFoundError("cannot open " + config_path);
      const std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      try {
        std::cout << serialize_config(validate_config(raw));
      } catch (const ValidationError& e) {
        std::cerr << "invalid: " << e.field() << ": " << e.message() << "\n";
        return 2;
      } catch (const ParseError& e) {
        std::cerr << "malformed at byte " << e.offset() << ": " << e.what() << "\n";
        return 2;
      }
      return 0;
    }
    if (*registry) {
      json list = json::array();
      for (const auto& d : dataset_registry()) {
        list.push_back({{"name", d.name},
                        {"source", d.source},
                        {"approx_size", d.approx_size},
                        {"train_size", d.train_size},
                        {"question_type", d.question_type},
                        {"access_url", d.access_url}});
      }
      print(list);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
