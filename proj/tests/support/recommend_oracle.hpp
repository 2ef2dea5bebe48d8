#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ragebench/recommender.hpp"

namespace ragebench::testkit {

struct Session {
  ScoreMatrix matrix;
  std::vector<MetricDescriptor> descriptors;
};

struct OracleResult {
  std::vector<std::optional<double>> composites;
  std::optional<std::size_t> winner;
};

/// Triple loop straight from the definitions: global extremes per metric,
/// weighted cell scores, mean over defined cells, argmax with lowest index on ties.
inline OracleResult brute_force(const Session& s) {
  const auto& cells = s.matrix.cells;
  const std::size_t nm = s.matrix.metrics.size();
  std::vector<std::optional<std::pair<long double, long double>>> ext(nm);
  for (std::size_t j = 0; j < cells.size(); ++j) {
    for (std::size_t k = 0; k < cells[j].size(); ++k) {
      for (std::size_t i = 0; i < nm; ++i) {
        if (!cells[j][k][i]) continue;
        const long double v = *cells[j][k][i];
        if (!ext[i]) ext[i] = std::make_pair(v, v);
        ext[i]->first = std::min(ext[i]->first, v);
        ext[i]->second = std::max(ext[i]->second, v);
      }
    }
  }
  OracleResult r;
  for (std::size_t j = 0; j < cells.size(); ++j) {
    long double total = 0;
    std::size_t defined = 0;
    for (std::size_t k = 0; k < cells[j].size(); ++k) {
      for (std::size_t i = 0; i < nm; ++i) {
        if (!cells[j][k][i]) continue;
        const long double v = *cells[j][k][i];
        const long double w = s.descriptors[i].weight;
        long double score;
        if (s.descriptors[i].direction == Direction::high_is_better) {
          score = w * v;
        } else {
          const auto [lo, hi] = *ext[i];
          score = hi == lo ? w : w * (1.0L - (v - lo) / (hi - lo));
        }
        total += score;
        ++defined;
      }
    }
    r.composites.push_back(defined ? std::optional<double>(static_cast<double>(total / defined)) : std::nullopt);
  }
  for (std::size_t j = 0; j < r.composites.size(); ++j) {
    if (r.composites[j] && (!r.winner || *r.composites[j] > *r.composites[*r.winner])) r.winner = j;
  }
  return r;
}

inline CombinationSpec synthetic_combination(std::size_t ordinal) {
  CombinationSpec c;
  c.llm = "llm-" + std::to_string(ordinal);
  c.embedder = "reference";
  c.chunk_size = 256;
  c.top_k = 3;
  c = make_combination(c);
  c.ordinal = ordinal;
  return c;
}

/// <= 5 combinations, <= 6 metrics, <= 10 instances each, random directions and
/// weights, about one cell in ten undefined.
inline Session random_session(std::mt19937_64& rng) {
  static const std::vector<std::string> ids{"hallucination",  "faithfulness",       "answer_relevancy",
                                            "context_precision", "context_recall", "retrieval_latency",
                                            "generation_latency", "mean_vram",     "tokens_per_second"};
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const std::size_t nc = 1 + rng() % 5, nm = 1 + rng() % 6;
  std::vector<std::string> metrics = ids;
  std::shuffle(metrics.begin(), metrics.end(), rng);
  metrics.resize(nm);
  std::vector<CombinationSpec> combos;
  for (std::size_t j = 0; j < nc; ++j) combos.push_back(synthetic_combination(j));
  Session s{ScoreMatrix(metrics, combos), {}};
  const double levels[] = {0.0, 1.0, 3.0, 5.0};
  for (const auto& id : metrics) {
    MetricDescriptor d;
    d.metric_id = id;
    d.direction = rng() % 2 ? Direction::high_is_better : Direction::low_is_better;
    d.weight = rng() % 4 ? levels[rng() % 4] : uniform(0.0, 10.0);
    s.descriptors.push_back(d);
  }
  for (std::size_t j = 0; j < nc; ++j) {
    const std::size_t nk = 1 + rng() % 10;
    for (std::size_t k = 0; k < nk; ++k) {
      std::vector<std::optional<double>> row;
      for (std::size_t i = 0; i < nm; ++i) {
        if (rng() % 10 == 0) {
          row.push_back(std::nullopt);
        } else {
          row.push_back(s.descriptors[i].direction == Direction::high_is_better ? uniform(0.0, 1.0)
                                                                                   : uniform(0.01, 100.0));
        }
      }
      s.matrix.add_instance(j, row);
    }
  }
  return s;
}

}  // namespace ragebench::testkit
