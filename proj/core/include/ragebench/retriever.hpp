#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ragebench/chunker.hpp"
#include "ragebench/config.hpp"
#include "ragebench/embeddings.hpp"
#include "ragebench/lexical_index.hpp"
#include "ragebench/vector_store.hpp"

namespace ragebench {

/// Dense index plus the lexical index built over the same chunks.
struct ChunkStore {
  std::unique_ptr<VectorIndex> vectors;
  LexicalIndex lexical;
  std::size_t embedded_chunks = 0;
  double build_seconds = 0.0;
};

/// Embeds `chunks` with `embedder` and loads both indexes. A persistent
/// store at `store_path` is recreated from scratch.
ChunkStore build_chunk_store(StorageKind kind, const std::filesystem::path& store_path,
                             EmbeddingProvider& embedder, const std::vector<Chunk>& chunks);

struct RetrievalSpec {
  SearchType search_type = SearchType::similarity;
  DistanceMetric metric = DistanceMetric::cosine;
  int top_k = 4;
  bool rerank = false;
  int candidate_multiplier = 5;
};

enum class Provenance { dense, sparse, both };
std::string_view to_string(Provenance p);

struct RetrievedItem {
  std::string chunk_id;
  Chunk chunk;
  /// Higher is better: similarity for cosine/inner product, negated distance
  /// for euclidean, fused RRF score for hybrid, reranker score after reranking.
  double score = 0.0;
  Provenance provenance = Provenance::dense;
};

struct RetrievedContext {
  std::vector<RetrievedItem> items;
  double retrieval_latency_s = 0.0;
  std::vector<std::string> warnings;
};

class RerankerProvider {
 public:
  virtual ~RerankerProvider() = default;
  virtual std::string name() const = 0;
  /// One relevance score per document, same order.
  virtual std::vector<double> score(const std::string& query,
                                    std::span<const std::string> documents) = 0;
};

/// Cosine of 256-bucket reference embeddings; 0 when either side has no token.
class ReferenceReranker final : public RerankerProvider {
 public:
  std::string name() const override { return "reference"; }
  std::vector<double> score(const std::string& query, std::span<const std::string> documents) override;
};

/// POST {model, query, documents} -> {scores: [...]}.
class HttpReranker final : public RerankerProvider {
 public:
  HttpReranker(std::string endpoint, std::string model, double timeout_s, int retries);
  std::string name() const override { return model_; }
  std::vector<double> score(const std::string& query, std::span<const std::string> documents) override;

 private:
  std::string endpoint_;
  std::string model_;
  double timeout_s_;
  int retries_;
};

/// providers.reranker: absent or "builtin:reference" -> ReferenceReranker,
/// otherwise an HTTP endpoint (model name from providers.reranker_model).
std::unique_ptr<RerankerProvider> make_reranker(const std::map<std::string, std::string>& endpoints,
                                                const RuntimeOptions& runtime);

/// Reciprocal rank fusion constant.
inline constexpr double kRrfK = 60.0;

RetrievedContext similarity_retrieve(const ChunkStore& store, EmbeddingProvider& embedder,
                                     const std::string& query, const RetrievalSpec& spec);
RetrievedContext hybrid_retrieve(const ChunkStore& store, EmbeddingProvider& embedder,
                                 const std::string& query, const RetrievalSpec& spec);

/// Stable sort by reranker score, descending. A failing provider leaves the
/// input order and appends a warning.
std::vector<RetrievedItem> rerank(const std::string& query, std::vector<RetrievedItem> candidates,
                                  RerankerProvider& reranker, std::vector<std::string>& warnings);

/// Dispatches on spec.search_type; when spec.rerank is set draws
/// top_k * candidate_multiplier candidates, reranks and keeps top_k.
RetrievedContext retrieve(const ChunkStore& store, EmbeddingProvider& embedder,
                          RerankerProvider* reranker, const std::string& query,
                          const RetrievalSpec& spec);

}  // namespace ragebench
