#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ragebench/config.hpp"
#include "ragebench/retriever.hpp"

namespace ragebench {

/// Zero-shot grounding template with {similar_chunks} and {query} slots.
std::string_view prompt_template();

/// Single-pass substitution: text inside chunks or the query is never re-expanded.
/// Chunks are joined by a blank line in rank order.
std::string build_prompt(std::string_view query, const std::vector<std::string>& chunk_texts);
std::string build_prompt(std::string_view query, const RetrievedContext& context);

inline constexpr std::string_view kNoInformationReply = "No relevant information provided.";

struct DecodeParams {
  double temperature = 0.0;
  int top_k = 1;
  std::uint64_t seed = 0;
};

struct LlmReply {
  std::string text;
  std::optional<int> tokens;  // provider-reported count when available
};

class LLMProvider {
 public:
  virtual ~LLMProvider() = default;
  virtual const std::string& model_id() const = 0;
  virtual LlmReply complete(const std::string& prompt, const DecodeParams& params) = 0;
};

struct GenerationRecord {
  std::string answer_text;
  double generation_latency_s = 0.0;
  int tokens_generated = 0;
  double tokens_per_second = 0.0;
  std::string model_id;
};

/// Times the call on the monotonic clock. Provider errors propagate.
GenerationRecord generate(LLMProvider& provider, const std::string& prompt,
                          const DecodeParams& params);

int whitespace_tokens(std::string_view text);

/// Offline provider. `echo-context` answers with the first sentence of the
/// prompt's context block; `scripted` looks the query up in a fixture
/// (docs/providers.md#scripted-llm).
class MockLLM final : public LLMProvider {
 public:
  enum class Behavior { echo_context, scripted };

  static std::unique_ptr<MockLLM> echo_context(std::string model_id = "mock:echo-context");
  static std::unique_ptr<MockLLM> scripted(const std::filesystem::path& fixture,
                                           std::string model_id = "mock:scripted");
  static std::unique_ptr<MockLLM> scripted(std::map<std::string, std::string> replies,
                                           std::string fallback,
                                           std::string model_id = "mock:scripted");

  const std::string& model_id() const override { return model_id_; }
  LlmReply complete(const std::string& prompt, const DecodeParams& params) override;

  /// Sleeps this long inside every call.
  void set_delay(std::chrono::milliseconds delay) { delay_ = delay; }

 private:
  MockLLM(Behavior behavior, std::string model_id) : behavior_(behavior), model_id_(std::move(model_id)) {}

  Behavior behavior_;
  std::string model_id_;
  std::map<std::string, std::string> replies_;
  std::map<std::string, std::string> failures_;
  std::string fallback_;
  std::chrono::milliseconds delay_{0};
};

/// Extracts the pieces build_prompt inserted.
std::string prompt_query(std::string_view prompt);
std::string prompt_context(std::string_view prompt);

/// Either the native route (POST {model, prompt, params} -> {answer, tokens})
/// or a local model server's generate route.
class HttpLLM final : public LLMProvider {
 public:
  enum class Dialect { native, ollama };
  HttpLLM(std::string endpoint, std::string model, Dialect dialect, double timeout_s, int retries);
  const std::string& model_id() const override { return model_; }
  LlmReply complete(const std::string& prompt, const DecodeParams& params) override;

 private:
  std::string endpoint_;
  std::string model_;
  Dialect dialect_;
  double timeout_s_;
  int retries_;
};

/// "mock:echo-context", "mock:scripted" (fixture at providers.llm_script) or an
/// HTTP model served at providers.llm ("ollama:" prefix selects that dialect).
std::unique_ptr<LLMProvider> make_llm_provider(const std::string& model_id,
                                               const std::map<std::string, std::string>& endpoints,
                                               const RuntimeOptions& runtime,
                                               const std::filesystem::path& base_dir = {});

}  // namespace ragebench
