#include <random>

#include <benchmark/benchmark.h>

#include "ragebench/embeddings.hpp"
#include "ragebench/vector_store.hpp"

using namespace ragebench;

namespace {

std::vector<StoredChunk> make_chunks(std::size_t n, std::size_t dim) {
  std::mt19937 rng(1);
  std::normal_distribution<float> g;
  std::vector<StoredChunk> out;
  for (std::size_t i = 0; i < n; ++i) {
    Chunk c;
    c.text = "chunk";
    c.source_id = "bench";
    c.ordinal = static_cast<int>(i);
    std::vector<float> v(dim);
    for (auto& x : v) x = g(rng);
    out.push_back({make_chunk_id(c), c, EmbeddingVector{std::move(v), "random"}});
  }
  return out;
}

void BM_KnnMemory(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto metric = static_cast<DistanceMetric>(state.range(1));
  MemoryLibraryIndex index(256);
  index.upsert(make_chunks(n, 256));
  const auto q = make_chunks(1, 256)[0].vector;
  for (auto _ : state) benchmark::DoNotOptimize(index.knn_search(q.view(), 10, metric));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_KnnMemory)->ArgsProduct({{1000, 10000}, {0, 1, 2}});

void BM_ReferenceEmbed(benchmark::State& state) {
  const std::string text = "The Larkspur Bridge opened in 1989 and is 299 meters long; farms grow barley.";
  for (auto _ : state) benchmark::DoNotOptimize(reference_embed(text, 256));
}
BENCHMARK(BM_ReferenceEmbed);

}  // namespace
