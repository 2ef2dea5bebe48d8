#include "ragebench/vector_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <mutex>
#include <set>
#include <sstream>

#include "ragebench/errors.hpp"
#include "ragebench/text.hpp"

namespace ragebench {

namespace {

constexpr char kMagic[4] = {'R', 'B', 'V', 'S'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kUpsert = 1;
constexpr std::uint8_t kDelete = 2;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_str(std::string& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}
void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  bool has(std::size_t n) const { return pos_ + n <= data_.size(); }
  std::size_t pos() const { return pos_; }
  std::uint8_t u8() { return static_cast<std::uint8_t>(data_[pos_++]); }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(data_[pos_++])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(data_[pos_++])) << (8 * i);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    if (!has(n)) throw IndexError("truncated string");
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string_view take(std::size_t n) {
    auto v = data_.substr(pos_, n);
    pos_ += n;
    return v;
  }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string header(std::size_t dim) {
  std::string out(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(dim));
  return out;
}

// type u8 | payload length u32 | payload | checksum u32 (low half of FNV-1a 64 of payload)
std::string frame(std::uint8_t type, const std::string& payload) {
  std::string out;
  out.push_back(static_cast<char>(type));
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  out += payload;
  put_u32(out, static_cast<std::uint32_t>(fnv1a64(payload) & 0xFFFFFFFFu));
  return out;
}

std::string encode_upsert(const StoredChunk& c) {
  std::string p;
  put_str(p, c.chunk_id);
  put_str(p, c.chunk.source_id);
  put_u32(p, static_cast<std::uint32_t>(c.chunk.ordinal));
  put_u64(p, c.chunk.char_start);
  put_u64(p, c.chunk.char_end);
  put_str(p, c.chunk.text);
  put_str(p, c.vector.model_id);
  for (float f : c.vector.values) put_f32(p, f);
  return frame(kUpsert, p);
}

std::string encode_delete(const std::string& id) {
  std::string p;
  put_str(p, id);
  return frame(kDelete, p);
}

void write_all(int fd, const std::string& bytes, const std::filesystem::path& path) {
  const char* data = bytes.data();
  std::size_t left = bytes.size();
  while (left > 0) {
    const ssize_t n = ::write(fd, data, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IndexError("write to " + path.string() + " failed: " + std::strerror(errno));
    }
    data += n;
    left -= static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) throw IndexError("fsync of " + path.string() + " failed");
}

}  // namespace

std::string make_chunk_id(const Chunk& chunk) {
  std::string ord = std::to_string(chunk.ordinal);
  if (ord.size() < 6) ord.insert(0, 6 - ord.size(), '0');
  return chunk.source_id + "/" + ord;
}

double metric_score(DistanceMetric metric, std::span<const float> x, std::span<const float> y) {
  switch (metric) {
    case DistanceMetric::cosine: return cosine_similarity(x, y);
    case DistanceMetric::euclidean: return euclidean_distance(x, y);
    case DistanceMetric::inner_product: return inner_product(x, y);
  }
  return 0.0;
}

bool ranks_before(DistanceMetric metric, const ScoredId& a, const ScoredId& b) {
  if (a.score != b.score) {
    return metric == DistanceMetric::euclidean ? a.score < b.score : a.score > b.score;
  }
  return a.chunk_id < b.chunk_id;
}

VectorIndex::VectorIndex(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ArgumentError("vector index dimension must be positive");
}

void VectorIndex::check_batch(std::span<const StoredChunk> chunks) const {
  std::set<std::string_view> seen;
  for (const auto& c : chunks) {
    if (c.vector.dim() != dim_) {
      throw IndexError("vector for '" + c.chunk_id + "' has dim " + std::to_string(c.vector.dim()) +
                       ", index expects " + std::to_string(dim_));
    }
    if (c.chunk_id.empty()) throw IndexError("chunk id must not be empty");
    if (!seen.insert(c.chunk_id).second) {
      throw IndexError("duplicate chunk id '" + c.chunk_id + "' within one batch");
    }
  }
}

std::vector<ScoredId> VectorIndex::knn_search(std::span<const float> query, std::size_t k,
                                              DistanceMetric metric) const {
  if (k == 0) throw ArgumentError("k must be at least 1");
  if (query.size() != dim_) throw DomainError("query dimension does not match the index");
  std::vector<ScoredId> scored;
  {
    std::shared_lock lock(mutex_);
    scan([&](const StoredChunk& c) {
      scored.push_back({c.chunk_id, metric_score(metric, query, c.vector.view())});
    });
  }
  const std::size_t n = std::min(k, scored.size());
  auto cmp = [metric](const ScoredId& a, const ScoredId& b) { return ranks_before(metric, a, b); };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), cmp);
  scored.resize(n);
  return scored;
}

std::size_t MemoryLibraryIndex::count() const {
  std::shared_lock lock(mutex_);
  return items_.size();
}

std::size_t MemoryLibraryIndex::upsert(std::span<const StoredChunk> chunks) {
  check_batch(chunks);
  std::unique_lock lock(mutex_);
  for (const auto& c : chunks) {
    auto it = position_.find(c.chunk_id);
    if (it != position_.end()) {
      items_[it->second] = c;
    } else {
      position_.emplace(c.chunk_id, items_.size());
      items_.push_back(c);
    }
  }
  return chunks.size();
}

void MemoryLibraryIndex::remove(const std::string& chunk_id) {
  throw UnsupportedOperation("memory_library indexes cannot delete '" + chunk_id +
                             "'; rebuild the index instead");
}

std::optional<StoredChunk> MemoryLibraryIndex::get(const std::string& chunk_id) const {
  std::shared_lock lock(mutex_);
  auto it = position_.find(chunk_id);
  if (it == position_.end()) return std::nullopt;
  return items_[it->second];
}

void MemoryLibraryIndex::scan(const std::function<void(const StoredChunk&)>& visit) const {
  for (const auto& c : items_) visit(c);
}

PersistentStoreIndex::PersistentStoreIndex(std::filesystem::path path, std::size_t dim)
    : VectorIndex(dim), path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  replay();
  fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
  if (fd_ < 0) throw IndexError("cannot open " + path_.string() + ": " + std::strerror(errno));
  if (std::filesystem::file_size(path_) == 0) write_all(fd_, header(this->dim()), path_);
}

PersistentStoreIndex::~PersistentStoreIndex() {
  try {
    std::unique_lock lock(mutex_);
    compact_locked();
  } catch (...) {
    // The uncompacted log is still valid.
  }
  if (fd_ >= 0) ::close(fd_);
}

void PersistentStoreIndex::replay() {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.empty()) return;
  Reader r(data);
  if (!r.has(12) || std::memcmp(data.data(), kMagic, 4) != 0) {
    throw IndexError(path_.string() + " is not a vector store file");
  }
  r.take(4);
  if (r.u32() != kVersion) throw IndexError(path_.string() + " has an unsupported version");
  if (r.u32() != dim()) throw IndexError(path_.string() + " was written with another dimension");

  std::size_t good_end = r.pos();
  while (r.has(5)) {
    const std::uint8_t type = r.u8();
    const std::uint32_t len = r.u32();
    if (!r.has(std::size_t{len} + 4)) break;
    const std::string_view payload = r.take(len);
    const std::uint32_t checksum = r.u32();
    if (checksum != static_cast<std::uint32_t>(fnv1a64(payload) & 0xFFFFFFFFu)) break;
    Reader p(payload);
    if (type == kUpsert) {
      StoredChunk c;
      c.chunk_id = p.str();
      c.chunk.source_id = p.str();
      c.chunk.ordinal = static_cast<int>(p.u32());
      c.chunk.char_start = p.u64();
      c.chunk.char_end = p.u64();
      c.chunk.text = p.str();
      c.vector.model_id = p.str();
      if (!p.has(dim() * 4)) break;
      c.vector.values.resize(dim());
      for (auto& f : c.vector.values) f = p.f32();
      items_[c.chunk_id] = std::move(c);
    } else if (type == kDelete) {
      items_.erase(p.str());
    } else {
      break;
    }
    good_end = r.pos();
  }
  if (good_end < data.size()) {
    // Torn tail from an interrupted write: drop it.
    std::filesystem::resize_file(path_, good_end);
  }
}

void PersistentStoreIndex::append(const std::string& record) { write_all(fd_, record, path_); }

std::size_t PersistentStoreIndex::count() const {
  std::shared_lock lock(mutex_);
  return items_.size();
}

std::size_t PersistentStoreIndex::upsert(std::span<const StoredChunk> chunks) {
  check_batch(chunks);
  std::string batch;
  for (const auto& c : chunks) batch += encode_upsert(c);
  std::unique_lock lock(mutex_);
  append(batch);
  for (const auto& c : chunks) items_[c.chunk_id] = c;
  return chunks.size();
}

void PersistentStoreIndex::remove(const std::string& chunk_id) {
  std::unique_lock lock(mutex_);
  if (!items_.contains(chunk_id)) throw NotFoundError("no chunk '" + chunk_id + "'");
  append(encode_delete(chunk_id));
  items_.erase(chunk_id);
}

std::optional<StoredChunk> PersistentStoreIndex::get(const std::string& chunk_id) const {
  std::shared_lock lock(mutex_);
  auto it = items_.find(chunk_id);
  if (it == items_.end()) return std::nullopt;
  return it->second;
}

void PersistentStoreIndex::scan(const std::function<void(const StoredChunk&)>& visit) const {
  for (const auto& [_, c] : items_) visit(c);
}

void PersistentStoreIndex::compact() {
  std::unique_lock lock(mutex_);
  compact_locked();
}

void PersistentStoreIndex::compact_locked() {
  std::string bytes = header(dim());
  for (const auto& [_, c] : items_) bytes += encode_upsert(c);
  const auto tmp = path_.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw IndexError("cannot open " + tmp);
  try {
    write_all(fd, bytes, tmp);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
  std::filesystem::rename(tmp, path_);
  if (fd_ >= 0) ::close(fd_);
  fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND, 0644);
  if (fd_ < 0) throw IndexError("cannot reopen " + path_.string());
}

std::unique_ptr<VectorIndex> make_vector_index(StorageKind kind, std::size_t dim,
                                               const std::filesystem::path& store_path) {
  if (kind == StorageKind::memory_library) return std::make_unique<MemoryLibraryIndex>(dim);
  return std::make_unique<PersistentStoreIndex>(store_path, dim);
}

}  // namespace ragebench
