#include "ragebench/recommender.hpp"

#include <algorithm>
#include <numeric>

#include "ragebench/errors.hpp"

namespace ragebench {

using nlohmann::json;

std::vector<MetricDescriptor> describe_metrics(const MetricWeights& weights, const RuntimeOptions& runtime) {
  std::vector<MetricDescriptor> out;
  for (const auto& m : metric_catalog()) {
    MetricDescriptor d{std::string(m.id), m.category, m.direction, static_cast<double>(weights.weight(m.id))};
    if (m.id == "hallucination") d.direction = runtime.hallucination_direction;
    out.push_back(std::move(d));
  }
  return out;
}

ScoreMatrix::ScoreMatrix(std::vector<std::string> metric_ids, std::vector<CombinationSpec> combos)
    : metrics(std::move(metric_ids)), combinations(std::move(combos)), cells(combinations.size()) {}

void ScoreMatrix::add_instance(std::size_t combination, std::vector<std::optional<double>> row) {
  if (combination >= cells.size()) throw ArgumentError("combination index out of range");
  if (row.size() != metrics.size()) throw ArgumentError("row width does not match metric count");
  cells[combination].push_back(std::move(row));
}

std::optional<Extremes> ScoreMatrix::extremes(std::size_t metric) const {
  std::optional<Extremes> e;
  for (const auto& combo : cells) {
    for (const auto& row : combo) {
      const auto& v = row.at(metric);
      if (!v) continue;
      if (!e) {
        e = Extremes{*v, *v};
      } else {
        e->min = std::min(e->min, *v);
        e->max = std::max(e->max, *v);
      }
    }
  }
  return e;
}

double weighted_score(double value, const MetricDescriptor& d, double min_value, double max_value) {
  if (d.weight < 0.0) throw ArgumentError("metric weight must be non-negative");
  if (d.direction == Direction::high_is_better) return d.weight * value;
  if (max_value < min_value) throw DomainError("max below min for " + d.metric_id);
  if (value < min_value || value > max_value) {
    throw DomainError(d.metric_id + " value outside its global extremes");
  }
  if (max_value == min_value) return d.weight;
  return d.weight * (1.0 - (value - min_value) / (max_value - min_value));
}

namespace {

std::vector<const MetricDescriptor*> align(const ScoreMatrix& matrix, const std::vector<MetricDescriptor>& ds) {
  std::vector<const MetricDescriptor*> out;
  for (const auto& id : matrix.metrics) {
    auto it = std::find_if(ds.begin(), ds.end(), [&](const MetricDescriptor& d) { return d.metric_id == id; });
    if (it == ds.end()) throw ArgumentError("no descriptor for metric " + id);
    out.push_back(&*it);
  }
  return out;
}

std::vector<std::vector<MetricContribution>> contributions(const ScoreMatrix& matrix,
                                                           const std::vector<const MetricDescriptor*>& ds) {
  std::vector<std::optional<Extremes>> ext;
  for (std::size_t i = 0; i < matrix.metrics.size(); ++i) ext.push_back(matrix.extremes(i));
  std::vector<std::vector<MetricContribution>> out(matrix.cells.size(),
                                                   std::vector<MetricContribution>(matrix.metrics.size()));
  for (std::size_t j = 0; j < matrix.cells.size(); ++j) {
    for (const auto& row : matrix.cells[j]) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        auto& c = out[j][i];
        if (!row[i]) {
          ++c.undefined;
          continue;
        }
        c.weighted_sum += weighted_score(*row[i], *ds[i], ext[i]->min, ext[i]->max);
        ++c.defined;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<CompositeScore> composite_scores(const ScoreMatrix& matrix,
                                             const std::vector<MetricDescriptor>& descriptors) {
  const auto table = contributions(matrix, align(matrix, descriptors));
  std::vector<CompositeScore> out;
  for (std::size_t j = 0; j < table.size(); ++j) {
    CompositeScore c;
    c.combination = j;
    double sum = 0.0;
    for (const auto& cell : table[j]) {
      sum += cell.weighted_sum;
      c.defined_cells += cell.defined;
      c.undefined_cells += cell.undefined;
    }
    if (c.defined_cells == 0) {
      c.excluded_reason = matrix.cells[j].empty() ? "no completed instances" : "no defined metric values";
    } else {
      c.score = sum / static_cast<double>(c.defined_cells);
    }
    out.push_back(std::move(c));
  }
  return out;
}

RecommendationReport best_combination(const ScoreMatrix& matrix, const std::vector<CompositeScore>& composites,
                                      const std::vector<MetricDescriptor>& descriptors) {
  RecommendationReport r;
  r.composites = composites;
  for (const auto& c : composites) {
    if (c.score) r.ranking.push_back(c.combination);
  }
  if (r.ranking.empty()) throw RecommendationError("no combination has a defined composite score");
  auto ordinal = [&](std::size_t j) {
    return j < matrix.combinations.size() ? matrix.combinations[j].ordinal : j;
  };
  std::stable_sort(r.ranking.begin(), r.ranking.end(), [&](std::size_t a, std::size_t b) {
    const double sa = *composites[a].score;
    const double sb = *composites[b].score;
    if (sa != sb) return sa > sb;
    return ordinal(a) < ordinal(b);
  });
  r.best = r.ranking.front();
  r.best_score = *composites[r.best].score;
  if (r.best < matrix.combinations.size()) r.best_spec = matrix.combinations[r.best];
  const auto aligned = align(matrix, descriptors);
  for (const auto* d : aligned) r.descriptors.push_back(*d);
  for (std::size_t i = 0; i < matrix.metrics.size(); ++i) r.extremes.push_back(matrix.extremes(i));
  r.contributions = contributions(matrix, aligned);
  return r;
}

RecommendationReport recommend(const ScoreMatrix& matrix, const std::vector<MetricDescriptor>& descriptors,
                               const ExperimentConfig* base) {
  auto report = best_combination(matrix, composite_scores(matrix, descriptors), descriptors);
  if (base != nullptr) report.emitted_config = emit_best_config(*base, report.best_spec);
  return report;
}

ExperimentConfig emit_best_config(const ExperimentConfig& base, const CombinationSpec& best) {
  ExperimentConfig out = base;
  out.grid.llms = {best.llm};
  out.grid.embedders = {best.embedder};
  out.grid.storage_kinds = {best.storage_kind};
  out.grid.search_types = {best.search_type};
  out.grid.distance_metrics = {best.distance_metric};
  out.grid.rerank = {best.rerank};
  out.grid.chunk_sizes = {best.chunk_size};
  out.grid.chunk_overlaps = {best.chunk_overlap};
  out.grid.top_k = {best.top_k};
  check_config(out);
  return out;
}

json to_json(const RecommendationReport& r, const ScoreMatrix& matrix, const std::string& session_id) {
  auto combo_id = [&](std::size_t j) {
    return j < matrix.combinations.size() ? matrix.combinations[j].id : std::to_string(j);
  };
  json ranking = json::array();
  for (std::size_t pos = 0; pos < r.ranking.size(); ++pos) {
    const auto& c = r.composites[r.ranking[pos]];
    ranking.push_back({{"rank", pos + 1},
                       {"combination_id", combo_id(c.combination)},
                       {"ordinal", matrix.combinations.at(c.combination).ordinal},
                       {"composite", *c.score},
                       {"defined_cells", c.defined_cells},
                       {"undefined_cells", c.undefined_cells}});
  }
  json excluded = json::array();
  for (const auto& c : r.composites) {
    if (!c.score) excluded.push_back({{"combination_id", combo_id(c.combination)}, {"reason", c.excluded_reason}});
  }
  json metrics = json::array();
  for (std::size_t i = 0; i < r.descriptors.size(); ++i) {
    const auto& d = r.descriptors[i];
    json m{{"metric", d.metric_id},
           {"category", to_string(d.category)},
           {"direction", to_string(d.direction)},
           {"weight", d.weight}};
    m["min"] = r.extremes[i] ? json(r.extremes[i]->min) : json(nullptr);
    m["max"] = r.extremes[i] ? json(r.extremes[i]->max) : json(nullptr);
    metrics.push_back(std::move(m));
  }
  json contributions = json::array();
  for (std::size_t j = 0; j < r.contributions.size(); ++j) {
    json per_metric = json::object();
    for (std::size_t i = 0; i < r.contributions[j].size(); ++i) {
      const auto& c = r.contributions[j][i];
      per_metric[matrix.metrics[i]] = {
          {"mean_weighted", c.defined ? json(c.weighted_sum / static_cast<double>(c.defined)) : json(nullptr)},
          {"defined", c.defined},
          {"undefined", c.undefined}};
    }
    contributions.push_back({{"combination_id", combo_id(j)}, {"metrics", std::move(per_metric)}});
  }
  json out{{"schema", kRecommendationSchema},
           {"session_id", session_id},
           {"best",
            {{"combination_id", r.best_spec.id},
             {"ordinal", r.best_spec.ordinal},
             {"composite", r.best_score},
             {"combination", r.best_spec.to_json()}}},
           {"ranking", std::move(ranking)},
           {"excluded", std::move(excluded)},
           {"metrics", std::move(metrics)},
           {"contributions", std::move(contributions)}};
  out["config"] = r.emitted_config ? config_to_json(*r.emitted_config) : json(nullptr);
  return out;
}

}  // namespace ragebench
