#include <benchmark/benchmark.h>

#include "ragebench/chunker.hpp"

using namespace ragebench;

namespace {

void BM_SplitDocument(benchmark::State& state) {
  std::string text;
  for (int i = 0; i < state.range(0); ++i) {
    text += "Larkspur is a town on the Oriel River. The bridge opened in 1989";
    text += i % 5 == 4 ? ".\n\n" : ". ";
  }
  ChunkingParams p;
  p.chunk_size = 256;
  p.chunk_overlap = 32;
  for (auto _ : state) benchmark::DoNotOptimize(split_document(text, p, "doc"));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_SplitDocument)->Arg(10)->Arg(1000);

}  // namespace
