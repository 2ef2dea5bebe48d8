#include "ragebench/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>

#include "http_transport.hpp"
#include "ragebench/errors.hpp"
#include "ragebench/text.hpp"

namespace ragebench {

namespace {

void require_same_dim(std::span<const float> x, std::span<const float> y) {
  if (x.size() != y.size()) {
    throw DomainError("dimension mismatch: " + std::to_string(x.size()) + " vs " +
                      std::to_string(y.size()));
  }
}

std::vector<float> normalized(std::vector<float> raw, const std::string& model) {
  double sq = 0.0;
  for (float v : raw) {
    if (!std::isfinite(v)) throw ProviderContractError(model + " produced a non-finite component");
    sq += static_cast<double>(v) * v;
  }
  if (sq == 0.0) throw ProviderContractError(model + " produced a zero vector");
  const double norm = std::sqrt(sq);
  for (float& v : raw) v = static_cast<float>(static_cast<double>(v) / norm);
  return raw;
}

}  // namespace

std::vector<EmbeddingVector> embed_texts(EmbeddingProvider& provider,
                                         std::span<const std::string> texts) {
  if (texts.empty()) throw ArgumentError("embed_texts needs at least one text");
  for (const auto& t : texts) {
    if (t.empty()) throw ArgumentError("cannot embed an empty text");
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  const std::size_t batch = std::max<std::size_t>(1, provider.batch_size());
  std::size_t dim = 0;
  for (std::size_t start = 0; start < texts.size(); start += batch) {
    const auto slice = texts.subspan(start, std::min(batch, texts.size() - start));
    auto raw = provider.embed_batch(slice);
    if (raw.size() != slice.size()) {
      throw ProviderContractError(provider.model_id() + " returned " + std::to_string(raw.size()) +
                                  " vectors for " + std::to_string(slice.size()) + " texts");
    }
    for (auto& v : raw) {
      if (dim == 0) dim = v.size();
      if (v.empty() || v.size() != dim) {
        throw ProviderContractError(provider.model_id() + " returned inconsistent dimensions");
      }
      out.push_back({normalized(std::move(v), provider.model_id()), provider.model_id()});
    }
  }
  return out;
}

EmbeddingVector embed_text(EmbeddingProvider& provider, const std::string& text) {
  return std::move(embed_texts(provider, std::span<const std::string>(&text, 1)).front());
}

EmbeddingVector reference_embed(std::string_view text, std::size_t dim) {
  if (dim < 2) throw ArgumentError("reference embedder needs dim >= 2");
  const auto tokens = tokenize(text);
  if (tokens.empty()) throw DomainError("text has no alphanumeric token to embed");
  std::vector<double> counts(dim, 0.0);
  for (const auto& t : tokens) counts[fnv1a64(t) % dim] += 1.0;
  double sq = 0.0;
  for (double c : counts) sq += c * c;
  const double norm = std::sqrt(sq);
  EmbeddingVector v;
  v.model_id = "reference:" + std::to_string(dim);
  v.values.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) v.values[i] = static_cast<float>(counts[i] / norm);
  return v;
}

ReferenceEmbedder::ReferenceEmbedder(std::size_t dim)
    : dim_(dim), model_id_("reference:" + std::to_string(dim)) {
  if (dim < 2) throw ArgumentError("reference embedder needs dim >= 2");
}

std::vector<std::vector<float>> ReferenceEmbedder::embed_batch(std::span<const std::string> texts) {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(reference_embed(t, dim_).values);
  return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string endpoint, std::string model,
                                             double timeout_s, int retries, std::size_t batch_size)
    : endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      timeout_s_(timeout_s),
      retries_(retries),
      batch_size_(batch_size) {}

std::vector<std::vector<float>> HttpEmbeddingProvider::embed_batch(
    std::span<const std::string> texts) {
  nlohmann::json body{{"model", model_}, {"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  const auto reply = detail::post_json(endpoint_, body, timeout_s_, retries_);
  if (!reply.is_object() || !reply.contains("embeddings") || !reply["embeddings"].is_array()) {
    throw ProviderContractError(endpoint_ + " reply lacks an 'embeddings' array");
  }
  std::vector<std::vector<float>> out;
  for (const auto& row : reply["embeddings"]) {
    if (!row.is_array()) throw ProviderContractError(endpoint_ + " embedding is not an array");
    std::vector<float> v;
    v.reserve(row.size());
    for (const auto& x : row) {
      if (!x.is_number()) throw ProviderContractError(endpoint_ + " embedding has a non-number");
      v.push_back(x.get<float>());
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const std::string& model_id, const std::map<std::string, std::string>& endpoints,
    const RuntimeOptions& runtime) {
  if (model_id == "reference") return std::make_unique<ReferenceEmbedder>(64);
  if (model_id.rfind("reference:", 0) == 0) {
    std::size_t dim = 0;
    const char* first = model_id.data() + 10;
    const char* last = model_id.data() + model_id.size();
    auto [ptr, ec] = std::from_chars(first, last, dim);
    if (ec != std::errc{} || ptr != last || dim < 2) {
      throw ArgumentError("bad reference embedder id '" + model_id + "'");
    }
    return std::make_unique<ReferenceEmbedder>(dim);
  }
  auto it = endpoints.find("embedder");
  if (it == endpoints.end()) {
    throw ArgumentError("embedder '" + model_id + "' needs providers.embedder");
  }
  return std::make_unique<HttpEmbeddingProvider>(it->second, model_id, runtime.request_timeout_s,
                                                 runtime.retries);
}

double inner_product(std::span<const float> x, std::span<const float> y) {
  require_same_dim(x, y);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += static_cast<double>(x[i]) * y[i];
  return sum;
}

double euclidean_distance(std::span<const float> x, std::span<const float> y) {
  require_same_dim(x, y);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - y[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double cosine_similarity(std::span<const float> x, std::span<const float> y) {
  require_same_dim(x, y);
  double dot = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += static_cast<double>(x[i]) * y[i];
    xx += static_cast<double>(x[i]) * x[i];
    yy += static_cast<double>(y[i]) * y[i];
  }
  if (xx == 0.0 || yy == 0.0) throw DomainError("cosine similarity of a zero-norm vector");
  return std::clamp(dot / (std::sqrt(xx) * std::sqrt(yy)), -1.0, 1.0);
}

}  // namespace ragebench
