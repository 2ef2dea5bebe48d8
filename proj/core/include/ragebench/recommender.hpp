#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragebench/config.hpp"

namespace ragebench {

struct MetricDescriptor {
  std::string metric_id;
  MetricCategory category = MetricCategory::generation;
  Direction direction = Direction::high_is_better;
  double weight = 0.0;
};

/// Descriptors for the whole catalog, weights mapped from `weights`.
std::vector<MetricDescriptor> describe_metrics(const MetricWeights& weights, const RuntimeOptions& runtime);

struct Extremes {
  double min = 0.0;
  double max = 0.0;
};

/// M[j][k][i]: combination j, instance k, metric i. Instances may differ in
/// number between combinations; nullopt marks an undefined value.
struct ScoreMatrix {
  std::vector<std::string> metrics;
  std::vector<CombinationSpec> combinations;
  std::vector<std::vector<std::vector<std::optional<double>>>> cells;

  ScoreMatrix() = default;
  ScoreMatrix(std::vector<std::string> metric_ids, std::vector<CombinationSpec> combos);

  /// Throws ArgumentError when the row width differs from metrics.size().
  void add_instance(std::size_t combination, std::vector<std::optional<double>> row);
  /// Global over every combination and instance; nullopt if no defined value.
  std::optional<Extremes> extremes(std::size_t metric) const;
};

/// high_is_better: w*value. low_is_better: w*(1 - (value-min)/(max-min)), or
/// w when max == min. Throws DomainError for a low_is_better value outside
/// [min, max] and ArgumentError for a negative weight.
double weighted_score(double value, const MetricDescriptor& descriptor, double min_value, double max_value);

struct CompositeScore {
  std::size_t combination = 0;
  std::optional<double> score;
  std::size_t defined_cells = 0;
  std::size_t undefined_cells = 0;
  std::string excluded_reason;  // set when score is nullopt
};

/// S_j = (sum over defined cells of S_ijk) / (number of defined cells).
/// `descriptors` is matched to matrix.metrics by id.
std::vector<CompositeScore> composite_scores(const ScoreMatrix& matrix,
                                             const std::vector<MetricDescriptor>& descriptors);

struct MetricContribution {
  double weighted_sum = 0.0;
  std::size_t defined = 0;
  std::size_t undefined = 0;
};

struct RecommendationReport {
  std::vector<CompositeScore> composites;  // in combination order
  std::vector<std::size_t> ranking;        // best first
  std::size_t best = 0;
  double best_score = 0.0;
  CombinationSpec best_spec;
  std::vector<MetricDescriptor> descriptors;
  std::vector<std::optional<Extremes>> extremes;                 // per metric
  std::vector<std::vector<MetricContribution>> contributions;  // [j][i]
  std::optional<ExperimentConfig> emitted_config;
};

/// Ranks by composite descending, ties by combination ordinal ascending.
/// Throws RecommendationError when nothing is rankable.
RecommendationReport best_combination(const ScoreMatrix& matrix, const std::vector<CompositeScore>& composites,
                                      const std::vector<MetricDescriptor>& descriptors);

/// composite_scores + best_combination, plus the emitted config when `base` is given.
RecommendationReport recommend(const ScoreMatrix& matrix, const std::vector<MetricDescriptor>& descriptors,
                               const ExperimentConfig* base = nullptr);

/// `base` with every grid axis narrowed to the winner's value.
ExperimentConfig emit_best_config(const ExperimentConfig& base, const CombinationSpec& best);

inline constexpr std::string_view kRecommendationSchema = "ragebench.recommendation/1";
nlohmann::json to_json(const RecommendationReport& report, const ScoreMatrix& matrix,
                       const std::string& session_id);

}  // namespace ragebench
