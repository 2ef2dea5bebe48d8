#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ragebench/vector_store.hpp"

namespace ragebench {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

/// Inverted index scored with Okapi BM25 using the non-negative idf
/// ln(1 + (N - df + 0.5) / (df + 0.5)). Every query token occurrence
/// contributes, so repeated query words weigh more.
class LexicalIndex {
 public:
  explicit LexicalIndex(Bm25Params params = {}) : params_(params) {}

  /// Adds or replaces a document.
  void add(const std::string& chunk_id, std::string_view text);
  void remove(const std::string& chunk_id);

  /// Best first, ties by chunk id. Documents without a query term are never returned.
  std::vector<ScoredId> search(std::string_view query, std::size_t k) const;

  std::size_t document_count() const noexcept { return doc_terms_.size(); }
  double average_length() const noexcept;
  std::size_t document_frequency(const std::string& term) const;
  const Bm25Params& params() const noexcept { return params_; }

 private:
  Bm25Params params_;
  // term -> (chunk id -> term frequency); postings are kept sorted by chunk id.
  std::map<std::string, std::map<std::string, int>> postings_;
  std::map<std::string, std::vector<std::string>> doc_terms_;
  std::map<std::string, std::size_t> doc_length_;
  std::size_t total_length_ = 0;
};

}  // namespace ragebench
