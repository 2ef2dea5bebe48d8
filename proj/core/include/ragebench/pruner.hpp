#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragebench/config.hpp"
#include "ragebench/records.hpp"

namespace ragebench {

struct GenerationKey {
  std::string llm_id;
  std::string embedder_id;
  auto operator<=>(const GenerationKey&) const = default;
};

struct RetrievalKey {
  std::string embedder_id;
  StorageKind storage_kind = StorageKind::memory_library;
  SearchType search_type = SearchType::similarity;
  DistanceMetric distance_metric = DistanceMetric::cosine;
  int chunk_size = 0;
  int top_k = 0;
  auto operator<=>(const RetrievalKey&) const = default;
};

GenerationKey generation_key(const CombinationSpec& c);
RetrievalKey retrieval_key(const CombinationSpec& c);

/// One history log line: the latency and VRAM facts of a single trial.
struct HistoryEntry {
  std::string session_id;
  CombinationSpec combination;
  std::size_t instance = 0;
  TrialStatus status = TrialStatus::ok;
  double generation_latency_s = 0.0;
  double retrieval_latency_s = 0.0;
  double total_latency_s = 0.0;
  std::optional<std::uint64_t> max_vram_bytes;
};

HistoryEntry history_entry(const TrialRecord& record, const CombinationSpec& combination);
nlohmann::json to_json(const HistoryEntry& e);
HistoryEntry history_entry_from_json(const nlohmann::json& j);

/// Running latency statistics for one key. The first ok trial is the
/// warm-up: it sets `warmed_up` and stays out of sum and count.
struct KeyStats {
  bool warmed_up = false;
  std::size_t count = 0;
  double sum = 0.0;
  std::optional<double> mean() const {
    return count == 0 ? std::nullopt : std::optional<double>(sum / static_cast<double>(count));
  }
  bool operator==(const KeyStats&) const = default;
};

struct HistoryStats {
  std::map<GenerationKey, KeyStats> generation;
  std::map<RetrievalKey, KeyStats> retrieval;
  /// Total latency per combination_id, warm-up excluded; feeds per-line estimates.
  std::map<std::string, KeyStats> combination_total;
  /// Max VRAM per combination_id over every trial that observed VRAM,
  /// including warm-up and interrupted trials.
  std::map<std::string, std::uint64_t> max_vram;
  bool operator==(const HistoryStats&) const = default;
};

/// Folds `entries` (in chronological order) into `history`. Only ok trials
/// contribute latencies.
HistoryStats update_history(HistoryStats history, std::span<const HistoryEntry> entries);

/// Pooled mean of combination_total over all combinations, if any.
std::optional<double> historical_seconds_per_line(const HistoryStats& stats);

struct PruneReason {
  std::string threshold;  // config field name, e.g. "max_generation_latency_s"
  double value = 0.0;
  double limit = 0.0;
  bool operator==(const PruneReason&) const = default;
};

struct PruneDecision {
  enum class Action { run, skip };
  Action action = Action::run;
  std::vector<PruneReason> reasons;
  bool skip() const noexcept { return action == Action::skip; }
};

nlohmann::json to_json(const PruneReason& r);

/// Skip iff a defined historical value strictly exceeds its threshold. The
/// total-latency check compares the sum of the generation and retrieval means
/// and needs both to be defined.
PruneDecision should_skip(const CombinationSpec& combination, const HistoryStats& history,
                          const ThresholdSet& thresholds);

/// True iff both are present and sample > limit.
bool check_vram_interrupt(std::optional<std::uint64_t> sample_vram, std::optional<std::uint64_t> max_vram);

inline constexpr std::string_view kHistorySchema = "ragebench.history/1";
inline constexpr std::string_view kHistorySnapshotSchema = "ragebench.history-snapshot/1";

/// Append-only history log plus a snapshot recomputed from it. The log is the
/// source of truth; a torn final line is ignored on load.
class HistoryStore {
 public:
  explicit HistoryStore(std::filesystem::path dir);

  const std::filesystem::path& log_path() const { return log_path_; }
  const std::filesystem::path& snapshot_path() const { return snapshot_path_; }

  std::vector<HistoryEntry> load_entries() const;
  HistoryStats load() const;
  void append(const HistoryEntry& entry);
  void write_snapshot(const HistoryStats& stats) const;

 private:
  std::filesystem::path log_path_;
  std::filesystem::path snapshot_path_;
};

nlohmann::json snapshot_to_json(const HistoryStats& stats);

}  // namespace ragebench
