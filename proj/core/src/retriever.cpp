#include "ragebench/retriever.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_map>

#include "http_transport.hpp"
#include "ragebench/errors.hpp"
#include "ragebench/text.hpp"

namespace ragebench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

RetrievedItem hydrate(const ChunkStore& store, const ScoredId& hit, double score, Provenance p) {
  auto stored = store.vectors->get(hit.chunk_id);
  if (!stored) throw IndexError("lexical hit '" + hit.chunk_id + "' missing from the vector index");
  return RetrievedItem{hit.chunk_id, std::move(stored->chunk), score, p};
}

std::vector<RetrievedItem> dense_candidates(const ChunkStore& store, EmbeddingProvider& embedder,
                                            const std::string& query, DistanceMetric metric,
                                            std::size_t n) {
  std::vector<RetrievedItem> out;
  if (store.vectors->count() == 0) return out;
  const EmbeddingVector q = embed_text(embedder, query);
  for (const auto& hit : store.vectors->knn_search(q.view(), n, metric)) {
    const double score = metric == DistanceMetric::euclidean ? -hit.score : hit.score;
    out.push_back(hydrate(store, hit, score, Provenance::dense));
  }
  return out;
}

std::size_t pool_size(const RetrievalSpec& spec) {
  if (spec.top_k < 1) throw ArgumentError("top_k must be at least 1");
  if (spec.candidate_multiplier < 1) throw ArgumentError("candidate_multiplier must be at least 1");
  return static_cast<std::size_t>(spec.top_k) * static_cast<std::size_t>(spec.candidate_multiplier);
}

std::vector<RetrievedItem> fuse(const ChunkStore& store, const std::vector<RetrievedItem>& dense,
                                const std::vector<ScoredId>& sparse) {
  struct Entry {
    double score = 0.0;
    bool in_dense = false;
    bool in_sparse = false;
    const RetrievedItem* dense_item = nullptr;
    const ScoredId* sparse_hit = nullptr;
  };
  std::unordered_map<std::string, Entry> fused;
  for (std::size_t r = 0; r < dense.size(); ++r) {
    Entry& e = fused[dense[r].chunk_id];
    e.score += 1.0 / (kRrfK + static_cast<double>(r + 1));
    e.in_dense = true;
    e.dense_item = &dense[r];
  }
  for (std::size_t r = 0; r < sparse.size(); ++r) {
    Entry& e = fused[sparse[r].chunk_id];
    e.score += 1.0 / (kRrfK + static_cast<double>(r + 1));
    e.in_sparse = true;
    e.sparse_hit = &sparse[r];
  }
  std::vector<RetrievedItem> out;
  out.reserve(fused.size());
  for (const auto& [id, e] : fused) {
    const Provenance p = e.in_dense && e.in_sparse ? Provenance::both
                         : e.in_dense              ? Provenance::dense
                                                   : Provenance::sparse;
    if (e.dense_item != nullptr) {
      RetrievedItem item = *e.dense_item;
      item.score = e.score;
      item.provenance = p;
      out.push_back(std::move(item));
    } else {
      out.push_back(hydrate(store, *e.sparse_hit, e.score, p));
    }
  }
  std::sort(out.begin(), out.end(), [](const RetrievedItem& a, const RetrievedItem& b) {
    return a.score != b.score ? a.score > b.score : a.chunk_id < b.chunk_id;
  });
  return out;
}

}  // namespace

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::dense: return "dense";
    case Provenance::sparse: return "sparse";
    case Provenance::both: return "both";
  }
  return "dense";
}

ChunkStore build_chunk_store(StorageKind kind, const std::filesystem::path& store_path,
                             EmbeddingProvider& embedder, const std::vector<Chunk>& chunks) {
  const auto start = Clock::now();
  ChunkStore store;
  std::vector<std::string> texts;
  texts.reserve(chunks.size());
  for (const auto& c : chunks) texts.push_back(c.text);
  std::vector<EmbeddingVector> vectors;
  std::size_t dim = 0;
  if (!texts.empty()) {
    vectors = embed_texts(embedder, texts);
    dim = vectors.front().dim();
  } else {
    // Probe the dimension so an empty index can still be created.
    dim = embed_text(embedder, "dimension probe").dim();
  }
  if (kind == StorageKind::persistent_store) {
    std::filesystem::remove(store_path);
    std::filesystem::remove(store_path.string() + ".tmp");
  }
  store.vectors = make_vector_index(kind, dim, store_path);
  std::vector<StoredChunk> batch;
  batch.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    batch.push_back({make_chunk_id(chunks[i]), chunks[i], std::move(vectors[i])});
    store.lexical.add(batch.back().chunk_id, chunks[i].text);
  }
  if (!batch.empty()) store.vectors->upsert(batch);
  store.embedded_chunks = batch.size();
  store.build_seconds = seconds_since(start);
  return store;
}

std::vector<double> ReferenceReranker::score(const std::string& query,
                                             std::span<const std::string> documents) {
  constexpr std::size_t kDim = 256;
  std::vector<double> out;
  out.reserve(documents.size());
  if (tokenize(query).empty()) return std::vector<double>(documents.size(), 0.0);
  const EmbeddingVector q = reference_embed(query, kDim);
  for (const auto& d : documents) {
    if (tokenize(d).empty()) {
      out.push_back(0.0);
      continue;
    }
    out.push_back(cosine_similarity(q.view(), reference_embed(d, kDim).view()));
  }
  return out;
}

HttpReranker::HttpReranker(std::string endpoint, std::string model, double timeout_s, int retries)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), timeout_s_(timeout_s), retries_(retries) {}

std::vector<double> HttpReranker::score(const std::string& query,
                                        std::span<const std::string> documents) {
  nlohmann::json body{{"model", model_},
                      {"query", query},
                      {"documents", std::vector<std::string>(documents.begin(), documents.end())}};
  const auto reply = detail::post_json(endpoint_, body, timeout_s_, retries_);
  if (!reply.is_object() || !reply.contains("scores") || !reply["scores"].is_array() ||
      reply["scores"].size() != documents.size()) {
    throw ProviderContractError(endpoint_ + " must return one score per document");
  }
  std::vector<double> out;
  for (const auto& s : reply["scores"]) {
    if (!s.is_number()) throw ProviderContractError(endpoint_ + " returned a non-numeric score");
    out.push_back(s.get<double>());
  }
  return out;
}

std::unique_ptr<RerankerProvider> make_reranker(const std::map<std::string, std::string>& endpoints,
                                                const RuntimeOptions& runtime) {
  auto it = endpoints.find("reranker");
  if (it == endpoints.end() || it->second == "builtin:reference") {
    return std::make_unique<ReferenceReranker>();
  }
  auto model = endpoints.find("reranker_model");
  return std::make_unique<HttpReranker>(it->second,
                                        model == endpoints.end() ? "reranker" : model->second,
                                        runtime.request_timeout_s, runtime.retries);
}

RetrievedContext similarity_retrieve(const ChunkStore& store, EmbeddingProvider& embedder,
                                     const std::string& query, const RetrievalSpec& spec) {
  const auto start = Clock::now();
  RetrievedContext ctx;
  ctx.items = dense_candidates(store, embedder, query, spec.metric,
                               static_cast<std::size_t>(std::max(spec.top_k, 1)));
  ctx.retrieval_latency_s = seconds_since(start);
  return ctx;
}

RetrievedContext hybrid_retrieve(const ChunkStore& store, EmbeddingProvider& embedder,
                                 const std::string& query, const RetrievalSpec& spec) {
  const auto start = Clock::now();
  const std::size_t pool = pool_size(spec);
  const auto dense = dense_candidates(store, embedder, query, spec.metric, pool);
  const auto sparse = store.lexical.search(query, pool);
  RetrievedContext ctx;
  ctx.items = fuse(store, dense, sparse);
  if (ctx.items.size() > static_cast<std::size_t>(spec.top_k)) ctx.items.resize(spec.top_k);
  ctx.retrieval_latency_s = seconds_since(start);
  return ctx;
}

std::vector<RetrievedItem> rerank(const std::string& query, std::vector<RetrievedItem> candidates,
                                  RerankerProvider& reranker, std::vector<std::string>& warnings) {
  if (candidates.size() <= 1) return candidates;
  std::vector<std::string> docs;
  docs.reserve(candidates.size());
  for (const auto& c : candidates) docs.push_back(c.chunk.text);
  std::vector<double> scores;
  try {
    scores = reranker.score(query, docs);
    if (scores.size() != candidates.size()) {
      throw ProviderContractError("reranker returned " + std::to_string(scores.size()) +
                                  " scores for " + std::to_string(candidates.size()) + " documents");
    }
  } catch (const std::exception& e) {
    warnings.push_back("reranker '" + reranker.name() + "' failed, keeping retrieval order: " + e.what());
    return candidates;
  }
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<RetrievedItem> out;
  out.reserve(candidates.size());
  for (std::size_t i : order) {
    out.push_back(std::move(candidates[i]));
    out.back().score = scores[i];
  }
  return out;
}

RetrievedContext retrieve(const ChunkStore& store, EmbeddingProvider& embedder,
                          RerankerProvider* reranker, const std::string& query,
                          const RetrievalSpec& spec) {
  const auto start = Clock::now();
  RetrievalSpec first_stage = spec;
  if (spec.rerank) {
    // The pool is already widened, so hybrid draws top_k * multiplier per branch.
    first_stage.top_k = static_cast<int>(pool_size(spec));
    first_stage.candidate_multiplier = 1;
  }
  RetrievedContext ctx = spec.search_type == SearchType::hybrid
                             ? hybrid_retrieve(store, embedder, query, first_stage)
                             : similarity_retrieve(store, embedder, query, first_stage);
  if (spec.rerank && !ctx.items.empty()) {
    ReferenceReranker fallback;
    ctx.items = rerank(query, std::move(ctx.items), reranker ? *reranker : fallback, ctx.warnings);
  }
  if (ctx.items.size() > static_cast<std::size_t>(spec.top_k)) ctx.items.resize(spec.top_k);
  ctx.retrieval_latency_s = seconds_since(start);
  return ctx;
}

}  // namespace ragebench
