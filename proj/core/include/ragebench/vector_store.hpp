#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ragebench/chunker.hpp"
#include "ragebench/config.hpp"
#include "ragebench/embeddings.hpp"

namespace ragebench {

struct StoredChunk {
  std::string chunk_id;
  Chunk chunk;
  EmbeddingVector vector;
  bool operator==(const StoredChunk&) const = default;
};

/// "<source_id>/<ordinal zero-padded to 6>" so ids sort in document order.
std::string make_chunk_id(const Chunk& chunk);

struct ScoredId {
  std::string chunk_id;
  double score = 0.0;
  bool operator==(const ScoredId&) const = default;
};

/// Similarity (cosine, inner product) or distance (euclidean) of two vectors.
double metric_score(DistanceMetric metric, std::span<const float> x, std::span<const float> y);
/// True when `a` ranks ahead of `b` for the metric (ties by chunk id ascending).
bool ranks_before(DistanceMetric metric, const ScoredId& a, const ScoredId& b);

/// Exact nearest-neighbour index over stored chunks. Readers may run
/// concurrently; writers are exclusive.
class VectorIndex {
 public:
  explicit VectorIndex(std::size_t dim);
  virtual ~VectorIndex() = default;
  VectorIndex(const VectorIndex&) = delete;
  VectorIndex& operator=(const VectorIndex&) = delete;

  virtual StorageKind kind() const noexcept = 0;
  std::size_t dim() const noexcept { return dim_; }
  virtual std::size_t count() const = 0;

  /// Inserts or replaces by chunk id. Returns inserted + replaced.
  virtual std::size_t upsert(std::span<const StoredChunk> chunks) = 0;
  virtual void remove(const std::string& chunk_id) = 0;
  virtual std::optional<StoredChunk> get(const std::string& chunk_id) const = 0;

  /// min(k, count) results, best first; brute force.
  std::vector<ScoredId> knn_search(std::span<const float> query, std::size_t k,
                                   DistanceMetric metric) const;

 protected:
  void check_batch(std::span<const StoredChunk> chunks) const;
  virtual void scan(const std::function<void(const StoredChunk&)>& visit) const = 0;

  mutable std::shared_mutex mutex_;

 private:
  std::size_t dim_;
};

/// Volatile library index: rebuilt, never edited item by item.
class MemoryLibraryIndex final : public VectorIndex {
 public:
  explicit MemoryLibraryIndex(std::size_t dim) : VectorIndex(dim) {}
  StorageKind kind() const noexcept override { return StorageKind::memory_library; }
  std::size_t count() const override;
  std::size_t upsert(std::span<const StoredChunk> chunks) override;
  /// Always throws UnsupportedOperation.
  void remove(const std::string& chunk_id) override;
  std::optional<StoredChunk> get(const std::string& chunk_id) const override;

 protected:
  void scan(const std::function<void(const StoredChunk&)>& visit) const override;

 private:
  std::vector<StoredChunk> items_;
  std::unordered_map<std::string, std::size_t> position_;
};

/// Full-CRUD store persisted as an append-only log (docs/persistent-store.md).
/// Every mutation is fsync'ed before returning; the log is compacted on close.
class PersistentStoreIndex final : public VectorIndex {
 public:
  /// Opens (replaying) or creates the log at `path`.
  PersistentStoreIndex(std::filesystem::path path, std::size_t dim);
  ~PersistentStoreIndex() override;

  StorageKind kind() const noexcept override { return StorageKind::persistent_store; }
  std::size_t count() const override;
  std::size_t upsert(std::span<const StoredChunk> chunks) override;
  void remove(const std::string& chunk_id) override;
  std::optional<StoredChunk> get(const std::string& chunk_id) const override;

  /// Rewrites the log with live records only; also run by the destructor.
  void compact();
  const std::filesystem::path& path() const noexcept { return path_; }

 protected:
  void scan(const std::function<void(const StoredChunk&)>& visit) const override;

 private:
  void replay();
  void append(const std::string& record);
  void compact_locked();

  std::filesystem::path path_;
  std::map<std::string, StoredChunk> items_;
  int fd_ = -1;
};

std::unique_ptr<VectorIndex> make_vector_index(StorageKind kind, std::size_t dim,
                                               const std::filesystem::path& store_path);

}  // namespace ragebench
