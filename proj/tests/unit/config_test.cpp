#include <gtest/gtest.h>

#include <random>
#include <set>

#include "ragebench/config.hpp"
#include "ragebench/errors.hpp"
#include "test_support.hpp"

using namespace ragebench;
using nlohmann::json;

namespace {

json minimal_payload() {
  return json::parse(R"({"datasets": [{"path": "d.json"}],
                         "grid": {"llms": ["mock:echo-context"], "embedders": ["reference"]}})");
}

std::string field_of(const json& payload) {
  try {
    validate_config(payload.dump());
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "<valid>";
}

}  // namespace

TEST(Config, OmittedWeightsDefaultToMedium) {
  const auto cfg = validate_config(minimal_payload().dump());
  for (const auto& m : metric_catalog()) {
    EXPECT_EQ(cfg.weights.level(m.id), WeightLevel::medium) << m.id;
    EXPECT_EQ(cfg.weights.weight(m.id), 3);
  }
}

TEST(Config, OverlapNotBelowSizeNamesTheAxis) {
  auto p = minimal_payload();
  p["grid"]["chunk_sizes"] = {256};
  p["grid"]["chunk_overlaps"] = {256};
  try {
    validate_config(p.dump());
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "grid.chunk_overlaps");
    EXPECT_NE(e.message().find("overlap must be < chunk size"), std::string::npos);
  }
}

TEST(Config, EmptyAxisNamesTheAxis) {
  for (const char* axis : {"llms", "embedders", "storage_kinds", "search_types", "distance_metrics",
                           "rerank", "chunk_sizes", "chunk_overlaps", "top_k"}) {
    auto p = minimal_payload();
    p["grid"][axis] = json::array();
    EXPECT_EQ(field_of(p), std::string("grid.") + axis);
  }
}

TEST(Config, MalformedPayloadReportsByteOffset) {
  const std::string text = R"({"datasets": [}, "grid": {}})";
  try {
    validate_config(text);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    // nlohmann counts bytes read, so the offending '}' is the last one consumed.
    EXPECT_EQ(e.offset(), text.find('}') + 1);
  }
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  auto p = minimal_payload();
  p["gird"] = json::object();
  EXPECT_EQ(field_of(p), "gird");
  p = minimal_payload();
  p["grid"]["distance_metrics"] = {"manhattan"};
  EXPECT_EQ(field_of(p), "grid.distance_metrics[0]");
  p = minimal_payload();
  p["weights"] = {{"generation", {{"faithfulness", "Huge"}}}};
  EXPECT_EQ(field_of(p), "weights.generation.faithfulness");
  p = minimal_payload();
  p["datasets"] = json::array();
  EXPECT_EQ(field_of(p), "datasets");
  p = minimal_payload();
  p["sample_size"] = 0;
  EXPECT_EQ(field_of(p), "sample_size");
  p = minimal_payload();
  p["thresholds"] = {{"max_vram_bytes", -1}};
  EXPECT_EQ(field_of(p), "thresholds.max_vram_bytes");
}

TEST(Config, FullFixtureRoundTripsCanonically) {
  const auto raw = testkit::read_text(testkit::fixture("config_full.json"));
  const auto cfg = validate_config(raw);
  const auto text = serialize_config(cfg);
  const auto again = validate_config(text);
  EXPECT_EQ(again, cfg);
  EXPECT_EQ(serialize_config(again), text);
  // Canonical form: sorted keys, two-space indent, trailing newline.
  EXPECT_EQ(json::parse(text).dump(2) + "\n", text);
  EXPECT_EQ(cfg.weights.level("hallucination"), WeightLevel::high);
  EXPECT_EQ(cfg.weights.level("context_recall"), WeightLevel::medium);
  EXPECT_EQ(cfg.weights.level("mean_vram"), WeightLevel::no_relevance);
  EXPECT_EQ(cfg.sample_size, std::optional<std::size_t>(10));
  EXPECT_EQ(cfg.random_seed, 7);
  EXPECT_EQ(cfg.thresholds.max_vram_bytes, std::optional<std::uint64_t>(8000000000ULL));
}

TEST(Config, RandomConfigsRoundTrip) {
  std::mt19937_64 rng(1234);
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
  const std::vector<std::string> levels{"NoRelevance", "Low", "Medium", "High"};
  for (int trial = 0; trial < 200; ++trial) {
    auto p = minimal_payload();
    p["seed"] = static_cast<long long>(rng() % 100000) - 50000;
    if (pick(2)) p["sample_size"] = 1 + pick(100);
    json sizes = json::array(), overlaps = json::array(), ks = json::array();
    const int max_size = 64 + pick(512);
    sizes.push_back(max_size);
    sizes.push_back(max_size + 1 + pick(100));
    overlaps.push_back(pick(max_size));
    ks.push_back(1 + pick(8));
    p["grid"]["chunk_sizes"] = sizes;
    p["grid"]["chunk_overlaps"] = overlaps;
    p["grid"]["top_k"] = ks;
    p["grid"]["rerank"] = pick(2) ? json{true, false} : json{false};
    json weights = json::object();
    for (const auto& m : metric_catalog()) {
      weights[std::string(to_string(m.category))][std::string(m.id)] = levels[static_cast<std::size_t>(pick(4))];
    }
    p["weights"] = weights;
    if (pick(2)) p["thresholds"] = {{"max_generation_latency_s", 0.5 + pick(100)}};
    const auto cfg = validate_config(p.dump());
    const auto text = serialize_config(cfg);
    EXPECT_EQ(validate_config(text), cfg);
    EXPECT_EQ(serialize_config(validate_config(text)), text);
  }
}

TEST(Config, EnumerationCountsFollowTheProduct) {
  GridAxes g;
  g.llms = {"a", "b"};
  g.embedders = {"x", "y"};
  g.storage_kinds = {StorageKind::memory_library};
  g.search_types = {SearchType::similarity};
  g.distance_metrics = {DistanceMetric::cosine};
  g.rerank = {false};
  g.chunk_sizes = {256};
  g.chunk_overlaps = {0};
  g.top_k = {3};
  EXPECT_EQ(enumerate_combinations(g).size(), 4u);

  GridAxes one = g;
  one.llms = {"a"};
  one.embedders = {"x"};
  EXPECT_EQ(enumerate_combinations(one).size(), 1u);

  GridAxes big;
  big.llms = {"a", "b"};
  big.embedders = {"x", "y"};
  big.storage_kinds = {StorageKind::memory_library, StorageKind::persistent_store};
  big.search_types = {SearchType::similarity, SearchType::hybrid};
  big.distance_metrics = {DistanceMetric::cosine, DistanceMetric::euclidean, DistanceMetric::inner_product};
  big.rerank = {false, true};
  big.chunk_sizes = {128, 256};
  big.chunk_overlaps = {0, 32};
  big.top_k = {2, 4};
  const auto all = enumerate_combinations(big);
  ASSERT_EQ(all.size(), 768u);
  EXPECT_EQ(big.cardinality(), 768u);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(all[i].ordinal, i);
    ids.insert(all[i].id);
  }
  EXPECT_EQ(ids.size(), all.size());
  // Lexicographic: the last axis varies fastest, the first slowest.
  EXPECT_EQ(all[0].top_k, 2);
  EXPECT_EQ(all[1].top_k, 4);
  EXPECT_EQ(all[0].llm, "a");
  EXPECT_EQ(all[384].llm, "b");
}

TEST(Config, CombinationIdIsStableAndRoundTrips) {
  GridAxes g;
  g.llms = {"m"};
  g.embedders = {"reference:64"};
  g.storage_kinds = {StorageKind::persistent_store};
  g.search_types = {SearchType::hybrid};
  g.distance_metrics = {DistanceMetric::euclidean};
  g.rerank = {true};
  g.chunk_sizes = {300};
  g.chunk_overlaps = {20};
  g.top_k = {5};
  const auto c = enumerate_combinations(g).at(0);
  EXPECT_EQ(c.id.size(), 16u);
  const auto back = combination_from_json(c.to_json());
  EXPECT_EQ(back.id, c.id);
  EXPECT_EQ(back.canonical_text(), c.canonical_text());
}

TEST(Config, EstimateCostExamples) {
  EXPECT_EQ(estimate_cost(2.0, 10, 4), 80.0);
  EXPECT_EQ(estimate_cost(1.75, 1, 1), 1.75);
  EXPECT_EQ(estimate_cost(0.5, 100, 768), 38400.0);
  EXPECT_THROW(estimate_cost(0.0, 1, 1), ArgumentError);
  EXPECT_THROW(estimate_cost(1.0, 0, 1), ArgumentError);
  EXPECT_THROW(estimate_cost(1.0, 1, -3), ArgumentError);
}

TEST(Config, WeightMapping) {
  EXPECT_EQ(map_weight(WeightLevel::high), 5);
  EXPECT_EQ(map_weight(WeightLevel::no_relevance), 0);
  EXPECT_EQ(map_weight(WeightLevel::medium), 3);
  EXPECT_EQ(map_weight(WeightLevel::low), 1);
}

TEST(Config, CatalogDirections) {
  auto dir = [](std::string_view id) { return find_metric(id)->direction; };
  for (auto id : {"faithfulness", "answer_relevancy", "context_precision", "context_recall", "hallucination",
                  "tokens_per_second"}) {
    EXPECT_EQ(dir(id), Direction::high_is_better) << id;
  }
  for (auto id : {"retrieval_latency", "generation_latency", "mean_vram"}) {
    EXPECT_EQ(dir(id), Direction::low_is_better) << id;
  }
  EXPECT_EQ(find_metric("nope"), nullptr);
}

TEST(Config, FingerprintTracksContent) {
  auto a = validate_config(minimal_payload().dump());
  auto b = a;
  EXPECT_EQ(config_fingerprint(a), config_fingerprint(b));
  b.random_seed = 1;
  EXPECT_NE(config_fingerprint(a), config_fingerprint(b));
}
