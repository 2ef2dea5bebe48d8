#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragebench/config.hpp"
#include "ragebench/pruner.hpp"
#include "ragebench/records.hpp"
#include "ragebench/telemetry.hpp"

namespace ragebench {

enum class SessionPhase { planning, indexing, running, aggregating, done, aborted };
std::string_view to_string(SessionPhase p);

struct SkippedCombination {
  std::string combination_id;
  std::size_t ordinal = 0;
  std::string stage;  // "planning" (history) or "in_run" (VRAM breach)
  std::vector<PruneReason> reasons;
};

struct CombinationProgress {
  std::string combination_id;
  std::size_t ordinal = 0;
  std::string status = "pending";  // pending, running, completed, failed, skipped
  std::size_t done = 0;
  std::size_t total = 0;
  /// Running means of quality metrics over this combination's ok trials.
  std::map<std::string, double> preview;
};

/// planned = skipped + completed + failed + pending, by combination id.
struct SessionState {
  std::string session_id;
  SessionPhase phase = SessionPhase::planning;
  std::vector<std::string> planned;
  std::vector<SkippedCombination> skipped;
  std::vector<std::string> completed;
  std::vector<std::string> failed;
  std::vector<std::string> pending;
  std::vector<CombinationProgress> progress;
  std::size_t trials_executed = 0;
  std::size_t trials_resumed = 0;
  std::vector<std::string> warnings;
  std::optional<std::string> best_combination_id;
  std::optional<std::string> error;
  std::string started_at;
  std::string finished_at;
  /// Bumped on every published snapshot.
  std::uint64_t revision = 0;
};

nlohmann::json to_json(const SessionState& s);

/// Output locations. History is shared by every session under output_dir;
/// everything else lives in output_dir/sessions/<session_id>/.
struct SessionPaths {
  std::filesystem::path root;
  std::filesystem::path session_dir;
  std::filesystem::path config_snapshot;
  std::filesystem::path trials;
  std::filesystem::path telemetry;
  std::filesystem::path recommendation;
  std::filesystem::path best_config;
  std::filesystem::path state;
  std::filesystem::path index_dir;
};

SessionPaths session_paths(const std::filesystem::path& output_dir, const std::string& session_id);

struct OrchestratorOptions {
  /// Relative dataset and fixture paths resolve against this directory.
  std::filesystem::path base_dir;
  /// Defaults to a SystemProbe owned by the run.
  ResourceProbe* probe = nullptr;
  /// Receives an immutable snapshot after every state change.
  std::function<void(std::shared_ptr<const SessionState>)> on_progress;
  /// Set to request a stop between trials; the session ends aborted.
  const std::atomic<bool>* cancel = nullptr;
};

/// Enumerate, prune against history, build shared indexes, run every pending
/// (combination, instance) serially with telemetry, record, update history,
/// aggregate and recommend. Pairs already in the session's trial log are not
/// re-run, except failed ones.
SessionState run_session(const ExperimentConfig& config, const OrchestratorOptions& options = {});

struct SessionEstimate {
  double seconds = 0.0;
  double per_line_seconds = 0.0;
  std::string source;  // "history", "calibration" or "given"
  std::size_t instances = 0;
  std::size_t combinations = 0;
  std::size_t skipped = 0;
};

/// estimate_cost over the combinations that survive pruning. The per-line time
/// comes from `per_line_seconds` when given, else history, else one calibration
/// trial (instance 0 of the first remaining combination, run twice, second timed).
SessionEstimate estimate_session(const ExperimentConfig& config, const OrchestratorOptions& options = {},
                                 std::optional<double> per_line_seconds = std::nullopt);

/// Total sampled rows across datasets.
std::size_t count_instances(const ExperimentConfig& config, const std::filesystem::path& base_dir = {});

/// Final record per (combination, instance), ordered by ordinal then instance.
/// Throws NotFoundError for an unknown session.
std::vector<TrialRecord> load_session_records(const std::filesystem::path& output_dir,
                                              const std::string& session_id);

/// Writes load_session_records as one compact line each; returns the count.
std::size_t export_results(const std::filesystem::path& output_dir, const std::string& session_id,
                           std::ostream& sink);

/// {"state": ..., "recommendation": ... | null}.
nlohmann::json export_summary(const std::filesystem::path& output_dir, const std::string& session_id);

}  // namespace ragebench
