#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "ragebench/errors.hpp"
#include "ragebench/vector_store.hpp"
#include "retrieval_oracle.hpp"
#include "test_support.hpp"

using namespace ragebench;

namespace {

constexpr DistanceMetric kMetrics[] = {DistanceMetric::cosine, DistanceMetric::euclidean,
                                       DistanceMetric::inner_product};

std::vector<std::string> ids_of(const std::vector<ScoredId>& v) {
  std::vector<std::string> out;
  for (const auto& s : v) out.push_back(s.chunk_id);
  return out;
}

}  // namespace

TEST(VectorStore, ChunkIdsSortInDocumentOrder) {
  Chunk c;
  c.source_id = "doc";
  c.ordinal = 42;
  EXPECT_EQ(make_chunk_id(c), "doc/000042");
}

TEST(VectorStore, UpsertIsIdempotent) {
  std::mt19937 rng(1);
  const auto chunks = testkit::random_chunks(rng, 5, 64);
  testkit::TempDir dir;
  for (auto kind : {StorageKind::memory_library, StorageKind::persistent_store}) {
    auto index = make_vector_index(kind, 64, dir / "idem.rbvs");
    EXPECT_EQ(index->upsert(chunks), 5u);
    EXPECT_EQ(index->upsert(chunks), 5u);
    EXPECT_EQ(index->count(), 5u);
    EXPECT_EQ(index->get(chunks[3].chunk_id), chunks[3]);
    EXPECT_EQ(index->get("missing"), std::nullopt);
  }
}

TEST(VectorStore, BatchErrors) {
  std::mt19937 rng(2);
  auto chunks = testkit::random_chunks(rng, 3, 64);
  MemoryLibraryIndex index(64);
  auto wrong = chunks;
  wrong[1].vector = reference_embed("other", 32);
  EXPECT_THROW(index.upsert(wrong), IndexError);
  auto dup = chunks;
  dup[2].chunk_id = dup[0].chunk_id;
  EXPECT_THROW(index.upsert(dup), IndexError);
  EXPECT_EQ(index.count(), 0u);
}

TEST(VectorStore, SelfMatchRanksFirst) {
  std::mt19937 rng(3);
  const auto chunks = testkit::random_chunks(rng, 50, 64);
  MemoryLibraryIndex index(64);
  index.upsert(chunks);
  const auto hits = index.knn_search(chunks[17].vector.values, 3, DistanceMetric::cosine);
  ASSERT_FALSE(hits.empty());
  // An identical sentence elsewhere ties at 1.0 and may sort first by id.
  EXPECT_NEAR(hits[0].score, 1.0, 1e-6);
  EXPECT_EQ(index.get(hits[0].chunk_id)->vector, chunks[17].vector);
}

TEST(VectorStore, KnnClampsAndHandlesEmpty) {
  std::mt19937 rng(4);
  MemoryLibraryIndex index(64);
  const auto q = reference_embed("river", 64).values;
  EXPECT_TRUE(index.knn_search(q, 5, DistanceMetric::cosine).empty());
  index.upsert(testkit::random_chunks(rng, 4, 64));
  EXPECT_EQ(index.knn_search(q, 10, DistanceMetric::cosine).size(), 4u);
  EXPECT_THROW(index.knn_search(q, 0, DistanceMetric::cosine), ArgumentError);
  EXPECT_THROW(index.knn_search(std::vector<float>(8, 0.1f), 1, DistanceMetric::cosine), DomainError);
}

TEST(VectorStore, KnnMatchesFullScanOracle) {
  std::mt19937 rng(5);
  const auto chunks = testkit::random_chunks(rng, 200, 64);
  MemoryLibraryIndex index(64);
  index.upsert(chunks);
  for (int t = 0; t < 10; ++t) {
    const auto q = reference_embed(testkit::random_sentence(rng, 4), 64).values;
    for (auto metric : kMetrics) {
      const auto got = index.knn_search(q, 10, metric);
      const auto want = testkit::full_scan(chunks, q, 10, metric);
      EXPECT_EQ(ids_of(got), ids_of(want));
      for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i].score, want[i].score, 1e-12);
    }
  }
}

TEST(VectorStore, MemoryLibraryIsNotEditable) {
  MemoryLibraryIndex index(64);
  EXPECT_THROW(index.remove("x"), UnsupportedOperation);
}

TEST(VectorStore, PersistentDeleteAndNotFound) {
  std::mt19937 rng(6);
  const auto chunks = testkit::random_chunks(rng, 10, 64);
  testkit::TempDir dir;
  PersistentStoreIndex index(dir / "del.rbvs", 64);
  index.upsert(chunks);
  index.remove(chunks[0].chunk_id);
  for (const auto& hit : index.knn_search(chunks[0].vector.values, 10, DistanceMetric::cosine)) {
    EXPECT_NE(hit.chunk_id, chunks[0].chunk_id);
  }
  EXPECT_EQ(index.count(), 9u);
  EXPECT_THROW(index.remove("nope"), NotFoundError);
}

TEST(VectorStore, PersistentSurvivesRestart) {
  std::mt19937 rng(7);
  const auto chunks = testkit::random_chunks(rng, 1000, 64);
  testkit::TempDir dir;
  const auto path = dir / "durable.rbvs";
  {
    PersistentStoreIndex index(path, 64);
    index.upsert(chunks);
    index.remove(chunks[5].chunk_id);
  }
  PersistentStoreIndex reopened(path, 64);
  EXPECT_EQ(reopened.count(), 999u);
  EXPECT_EQ(reopened.get(chunks[999].chunk_id), chunks[999]);
  EXPECT_EQ(reopened.get(chunks[5].chunk_id), std::nullopt);
  EXPECT_THROW(PersistentStoreIndex(path, 32), IndexError);
}

TEST(VectorStore, TornTailIsDroppedOnReplay) {
  std::mt19937 rng(8);
  const auto chunks = testkit::random_chunks(rng, 3, 64);
  testkit::TempDir dir;
  const auto path = dir / "torn.rbvs";
  {
    PersistentStoreIndex index(path, 64);
    index.upsert(chunks);
  }
  const auto size = std::filesystem::file_size(path);
  // Simulate a crash: the last record loses its final bytes.
  std::filesystem::resize_file(path, size - 7);
  {
    PersistentStoreIndex index(path, 64);
    EXPECT_EQ(index.count(), 2u);
    index.upsert(std::vector<StoredChunk>{chunks[2]});
    EXPECT_EQ(index.count(), 3u);
  }
  PersistentStoreIndex again(path, 64);
  EXPECT_EQ(again.get(chunks[2].chunk_id), chunks[2]);
}

TEST(VectorStore, RejectsForeignFiles) {
  testkit::TempDir dir;
  testkit::write_text(dir / "junk.rbvs", "definitely not a store");
  EXPECT_THROW(PersistentStoreIndex(dir / "junk.rbvs", 64), IndexError);
}
