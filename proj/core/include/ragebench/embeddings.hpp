#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ragebench/config.hpp"

namespace ragebench {

/// L2-normalized single-precision embedding.
struct EmbeddingVector {
  std::vector<float> values;
  std::string model_id;

  std::size_t dim() const noexcept { return values.size(); }
  std::span<const float> view() const noexcept { return values; }
  bool operator==(const EmbeddingVector&) const = default;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual const std::string& model_id() const = 0;
  virtual std::size_t batch_size() const { return 64; }
  /// One raw vector per text, same order. Normalization happens in embed_texts.
  virtual std::vector<std::vector<float>> embed_batch(std::span<const std::string> texts) = 0;
};

/// Batches, normalizes and validates provider output.
std::vector<EmbeddingVector> embed_texts(EmbeddingProvider& provider,
                                         std::span<const std::string> texts);
EmbeddingVector embed_text(EmbeddingProvider& provider, const std::string& text);

/// Hash-bag embedder: tokens (see tokenize) are FNV-1a hashed into
/// `hash % dim` buckets and the counts L2-normalized.
EmbeddingVector reference_embed(std::string_view text, std::size_t dim);

class ReferenceEmbedder final : public EmbeddingProvider {
 public:
  explicit ReferenceEmbedder(std::size_t dim = 64);
  const std::string& model_id() const override { return model_id_; }
  std::vector<std::vector<float>> embed_batch(std::span<const std::string> texts) override;
  std::size_t dim() const noexcept { return dim_; }

 private:
  std::size_t dim_;
  std::string model_id_;
};

/// POST {model, texts} -> {embeddings: [[float, ...], ...]}; see docs/providers.md.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string endpoint, std::string model, double timeout_s, int retries,
                        std::size_t batch_size = 32);
  const std::string& model_id() const override { return model_; }
  std::size_t batch_size() const override { return batch_size_; }
  std::vector<std::vector<float>> embed_batch(std::span<const std::string> texts) override;

 private:
  std::string endpoint_;
  std::string model_;
  double timeout_s_;
  int retries_;
  std::size_t batch_size_;
};

/// "reference" or "reference:<dim>" selects the built-in embedder; any other
/// model id is served by the endpoint registered under providers.embedder.
std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const std::string& model_id, const std::map<std::string, std::string>& endpoints,
    const RuntimeOptions& runtime);

/// x.y / (|x| |y|). DomainError on dimension mismatch or a zero-norm operand.
double cosine_similarity(std::span<const float> x, std::span<const float> y);
double euclidean_distance(std::span<const float> x, std::span<const float> y);
double inner_product(std::span<const float> x, std::span<const float> y);

}  // namespace ragebench
