#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragebench/judge.hpp"
#include "ragebench/telemetry.hpp"

namespace ragebench {

inline constexpr std::string_view kTrialSchema = "ragebench.trial/1";

enum class TrialStatus { ok, failed, interrupted };
std::string_view to_string(TrialStatus s);
std::optional<TrialStatus> parse_trial_status(std::string_view s);

struct RetrievedRef {
  std::string chunk_id;
  double score = 0.0;
  std::string provenance;
  bool operator==(const RetrievedRef&) const = default;
};

/// One (combination, instance) execution. Monotonic times are seconds since
/// the session started; started_at is wall clock for display only.
struct TrialRecord {
  std::string session_id;
  std::string combination_id;
  std::size_t combination_ordinal = 0;
  std::size_t instance = 0;
  std::string dataset;
  std::string source_id;
  std::string question;
  std::string expected_answer;
  std::vector<RetrievedRef> retrieved;
  std::string answer;
  std::int64_t tokens_generated = 0;
  double tokens_per_second = 0.0;
  MetricScores metrics;
  LatencyBreakdown latency;
  std::optional<TelemetrySummary> telemetry;
  TrialStatus status = TrialStatus::ok;
  /// Set on interrupted records: which limit was breached and by what value.
  std::optional<std::string> breach;
  std::vector<std::string> warnings;
  std::string started_at;
  double generation_started_s = 0.0;
  double generation_finished_s = 0.0;
};

bool operator==(const MetricScores& a, const MetricScores& b);
bool operator==(const TrialRecord& a, const TrialRecord& b);

nlohmann::json to_json(const MetricScores& m);
MetricScores metric_scores_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrialRecord& r);
/// Throws ValidationError on a missing or mistyped field.
TrialRecord trial_from_json(const nlohmann::json& j);

/// One compact line, no trailing newline.
std::string to_json_line(const TrialRecord& r);

}  // namespace ragebench
