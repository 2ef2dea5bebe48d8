#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ragebench {

enum class StorageKind { memory_library, persistent_store };
enum class SearchType { similarity, hybrid };
enum class DistanceMetric { cosine, euclidean, inner_product };
enum class DatasetFormat { json, csv };
enum class WeightLevel { no_relevance, low, medium, high };
enum class MetricCategory { generation, retrieval, hardware };
enum class Direction { high_is_better, low_is_better };

std::string_view to_string(StorageKind v);
std::string_view to_string(SearchType v);
std::string_view to_string(DistanceMetric v);
std::string_view to_string(DatasetFormat v);
std::string_view to_string(WeightLevel v);
std::string_view to_string(MetricCategory v);
std::string_view to_string(Direction v);

std::optional<StorageKind> parse_storage_kind(std::string_view s);
std::optional<SearchType> parse_search_type(std::string_view s);
std::optional<DistanceMetric> parse_distance_metric(std::string_view s);
std::optional<DatasetFormat> parse_dataset_format(std::string_view s);
std::optional<WeightLevel> parse_weight_level(std::string_view s);
std::optional<Direction> parse_direction(std::string_view s);

/// NoRelevance->0, Low->1, Medium->3, High->5.
constexpr int map_weight(WeightLevel level) noexcept {
  switch (level) {
    case WeightLevel::no_relevance: return 0;
    case WeightLevel::low: return 1;
    case WeightLevel::medium: return 3;
    case WeightLevel::high: return 5;
  }
  return 0;
}

/// A metric the recommender can weigh. The catalog is fixed; the direction
/// of hallucination can be flipped through RuntimeOptions.
struct MetricInfo {
  std::string_view id;
  MetricCategory category;
  Direction direction;
};

std::span<const MetricInfo> metric_catalog();
const MetricInfo* find_metric(std::string_view id);

struct DatasetRef {
  std::string name;
  std::string path;
  DatasetFormat format = DatasetFormat::json;
  bool operator==(const DatasetRef&) const = default;
};

struct GridAxes {
  std::vector<std::string> llms;
  std::vector<std::string> embedders;
  std::vector<StorageKind> storage_kinds;
  std::vector<SearchType> search_types;
  std::vector<DistanceMetric> distance_metrics;
  std::vector<bool> rerank;
  std::vector<int> chunk_sizes;
  std::vector<int> chunk_overlaps;
  std::vector<int> top_k;

  std::size_t cardinality() const noexcept;
  bool operator==(const GridAxes&) const = default;
};

struct ThresholdSet {
  std::optional<double> max_total_latency_s;
  std::optional<double> max_generation_latency_s;
  std::optional<double> max_retrieval_latency_s;
  std::optional<std::uint64_t> max_vram_bytes;
  bool operator==(const ThresholdSet&) const = default;
};

/// One level per catalog metric. Levels missing from a payload default to Medium.
struct MetricWeights {
  std::map<std::string, WeightLevel, std::less<>> levels;

  WeightLevel level(std::string_view metric) const;
  int weight(std::string_view metric) const { return map_weight(level(metric)); }
  static MetricWeights all(WeightLevel level);
  bool operator==(const MetricWeights&) const = default;
};

enum class RelevancyOperands { question, answer };

/// Execution knobs that are not part of the combination grid.
struct RuntimeOptions {
  int sampling_period_ms = 100;
  double request_timeout_s = 60.0;
  int retries = 2;
  int candidate_multiplier = 5;
  int potential_questions = 3;
  RelevancyOperands answer_relevancy_operands = RelevancyOperands::question;
  Direction hallucination_direction = Direction::high_is_better;
  double temperature = 0.0;
  int decode_top_k = 1;
  int max_in_flight = 1;
  bool operator==(const RuntimeOptions&) const = default;
};

struct ExperimentConfig {
  std::vector<DatasetRef> datasets;
  std::optional<std::size_t> sample_size;  // nullopt means "all"
  std::int64_t random_seed = 0;
  GridAxes grid;
  ThresholdSet thresholds;
  MetricWeights weights = MetricWeights::all(WeightLevel::medium);
  std::map<std::string, std::string> provider_endpoints;
  std::string output_dir = "ragebench-out";
  RuntimeOptions runtime;

  bool operator==(const ExperimentConfig&) const = default;
};

/// One point of the grid cross-product.
struct CombinationSpec {
  std::string llm;
  std::string embedder;
  StorageKind storage_kind = StorageKind::memory_library;
  SearchType search_type = SearchType::similarity;
  DistanceMetric distance_metric = DistanceMetric::cosine;
  bool rerank = false;
  int chunk_size = 0;
  int chunk_overlap = 0;
  int top_k = 1;

  /// Position in enumeration order; also the tie-break order.
  std::size_t ordinal = 0;
  /// hex64(fnv1a64(canonical_text())).
  std::string id;

  std::string canonical_text() const;
  nlohmann::json to_json() const;
};

CombinationSpec make_combination(CombinationSpec values);
/// Inverse of CombinationSpec::to_json; the id is recomputed, the ordinal left 0.
CombinationSpec combination_from_json(const nlohmann::json& j);

/// Parses and validates a payload, filling defaults. Throws ParseError on
/// malformed text and ValidationError on schema violations.
ExperimentConfig validate_config(std::string_view raw);
ExperimentConfig config_from_json(const nlohmann::json& doc);

/// Re-checks invariants of an in-memory config (used for emitted payloads).
void check_config(const ExperimentConfig& config);

nlohmann::json config_to_json(const ExperimentConfig& config);
/// Canonical text: sorted keys, two-space indent, trailing newline.
std::string serialize_config(const ExperimentConfig& config);

ExperimentConfig load_config_file(const std::filesystem::path& path);

/// Lexicographic over axes in GridAxes field order, values in declared order.
std::vector<CombinationSpec> enumerate_combinations(const GridAxes& grid);

/// per_line_seconds * n_instances * n_combinations. Warm-up is not modelled.
double estimate_cost(double per_line_seconds, long long n_instances, long long n_combinations);

std::string config_fingerprint(const ExperimentConfig& config);

}  // namespace ragebench
