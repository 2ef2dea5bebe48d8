#include "ragebench/lexical_index.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "ragebench/text.hpp"

namespace ragebench {

void LexicalIndex::add(const std::string& chunk_id, std::string_view text) {
  if (doc_terms_.contains(chunk_id)) remove(chunk_id);
  auto tokens = tokenize(text);
  std::map<std::string, int> tf;
  for (const auto& t : tokens) ++tf[t];
  std::vector<std::string> terms;
  terms.reserve(tf.size());
  for (const auto& [term, count] : tf) {
    postings_[term][chunk_id] = count;
    terms.push_back(term);
  }
  doc_terms_[chunk_id] = std::move(terms);
  doc_length_[chunk_id] = tokens.size();
  total_length_ += tokens.size();
}

void LexicalIndex::remove(const std::string& chunk_id) {
  auto it = doc_terms_.find(chunk_id);
  if (it == doc_terms_.end()) return;
  for (const auto& term : it->second) {
    auto p = postings_.find(term);
    p->second.erase(chunk_id);
    if (p->second.empty()) postings_.erase(p);
  }
  total_length_ -= doc_length_[chunk_id];
  doc_length_.erase(chunk_id);
  doc_terms_.erase(it);
}

double LexicalIndex::average_length() const noexcept {
  return doc_terms_.empty() ? 0.0
                            : static_cast<double>(total_length_) / static_cast<double>(doc_terms_.size());
}

std::size_t LexicalIndex::document_frequency(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.size();
}

std::vector<ScoredId> LexicalIndex::search(std::string_view query, std::size_t k) const {
  std::vector<ScoredId> out;
  if (k == 0 || doc_terms_.empty()) return out;
  const double n = static_cast<double>(doc_terms_.size());
  const double avgdl = average_length();
  std::unordered_map<std::string, double> scores;
  for (const auto& term : tokenize(query)) {
    auto p = postings_.find(term);
    if (p == postings_.end()) continue;
    const double df = static_cast<double>(p->second.size());
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    for (const auto& [id, tf_int] : p->second) {
      const double tf = tf_int;
      const double dl = static_cast<double>(doc_length_.at(id));
      const double norm = params_.k1 * (1.0 - params_.b + params_.b * dl / avgdl);
      scores[id] += idf * tf * (params_.k1 + 1.0) / (tf + norm);
    }
  }
  out.reserve(scores.size());
  for (auto& [id, score] : scores) out.push_back({id, score});
  auto cmp = [](const ScoredId& a, const ScoredId& b) {
    return a.score != b.score ? a.score > b.score : a.chunk_id < b.chunk_id;
  };
  const std::size_t m = std::min(k, out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(m), out.end(), cmp);
  out.resize(m);
  return out;
}

}  // namespace ragebench
