#include "ragebench/generator.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "http_transport.hpp"
#include "ragebench/errors.hpp"
#include "ragebench/text.hpp"

namespace ragebench {

namespace {

constexpr std::string_view kTemplate =
    "You are a professional assistant for answering questions.\n"
    "Your task is to summarize the topic using\n"
    "information from a given CONTEXT\n"
    "You will receive CONTEXT information\n"
    "and a user QUERY. Keep your answer grounded in\n"
    "the facts of the CONTEXT.\n"
    "You have to be as concise as possible,\n"
    "while still answering the user's query.\n"
    "If the CONTEXT doesn’t contain the facts to\n"
    "answer the QUERY, return No relevant information provided.\n"
    "Answer the users QUERY using the CONTEXT.\n"
    "CONTEXT information will be provided in the next sentence.\n"
    "{similar_chunks}\n"
    "Here is the user query: {query}\n";

constexpr std::string_view kContextLead = "CONTEXT information will be provided in the next sentence.\n";
constexpr std::string_view kQueryLead = "\nHere is the user query: ";

std::string first_sentence(std::string_view text) {
  text = trim(text);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '?' || c == '!') &&
        (i + 1 == text.size() || text[i + 1] == ' ' || text[i + 1] == '\n' || text[i + 1] == '\t')) {
      return std::string(text.substr(0, i + 1));
    }
  }
  return std::string(text);
}

std::filesystem::path resolve(const std::filesystem::path& base, std::string p) {
  if (p.rfind("file:", 0) == 0) p = p.substr(5);
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

std::string_view prompt_template() { return kTemplate; }

std::string build_prompt(std::string_view query, const std::vector<std::string>& chunk_texts) {
  std::string joined;
  for (std::size_t i = 0; i < chunk_texts.size(); ++i) {
    if (i) joined += "\n\n";
    joined += chunk_texts[i];
  }
  std::string out;
  out.reserve(kTemplate.size() + joined.size() + query.size());
  std::size_t pos = 0;
  while (pos < kTemplate.size()) {
    const auto open = kTemplate.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(kTemplate.substr(pos));
      break;
    }
    out.append(kTemplate.substr(pos, open - pos));
    const auto close = kTemplate.find('}', open);
    const auto name = kTemplate.substr(open + 1, close - open - 1);
    if (name == "similar_chunks") {
      out += joined;
    } else if (name == "query") {
      out.append(query);
    }
    pos = close + 1;
  }
  return out;
}

std::string build_prompt(std::string_view query, const RetrievedContext& context) {
  std::vector<std::string> texts;
  texts.reserve(context.items.size());
  for (const auto& item : context.items) texts.push_back(item.chunk.text);
  return build_prompt(query, texts);
}

std::string prompt_query(std::string_view prompt) {
  const auto at = prompt.rfind(kQueryLead);
  if (at == std::string_view::npos) return {};
  std::string_view q = prompt.substr(at + kQueryLead.size());
  if (!q.empty() && q.back() == '\n') q.remove_suffix(1);
  return std::string(q);
}

std::string prompt_context(std::string_view prompt) {
  const auto start = prompt.find(kContextLead);
  const auto end = prompt.rfind(kQueryLead);
  if (start == std::string_view::npos || end == std::string_view::npos) return {};
  const auto begin = start + kContextLead.size();
  if (end < begin) return {};
  return std::string(prompt.substr(begin, end - begin));
}

int whitespace_tokens(std::string_view text) {
  int n = 0;
  bool in_token = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

GenerationRecord generate(LLMProvider& provider, const std::string& prompt,
                          const DecodeParams& params) {
  const auto start = std::chrono::steady_clock::now();
  LlmReply reply = provider.complete(prompt, params);
  const double latency =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  GenerationRecord rec;
  rec.answer_text = std::move(reply.text);
  rec.generation_latency_s = latency;
  rec.tokens_generated = reply.tokens.value_or(whitespace_tokens(rec.answer_text));
  rec.tokens_per_second = latency > 0.0 ? rec.tokens_generated / latency : 0.0;
  rec.model_id = provider.model_id();
  return rec;
}

std::unique_ptr<MockLLM> MockLLM::echo_context(std::string model_id) {
  return std::unique_ptr<MockLLM>(new MockLLM(Behavior::echo_context, std::move(model_id)));
}

std::unique_ptr<MockLLM> MockLLM::scripted(std::map<std::string, std::string> replies,
                                           std::string fallback, std::string model_id) {
  auto m = std::unique_ptr<MockLLM>(new MockLLM(Behavior::scripted, std::move(model_id)));
  m->replies_ = std::move(replies);
  m->fallback_ = std::move(fallback);
  return m;
}

std::unique_ptr<MockLLM> MockLLM::scripted(const std::filesystem::path& fixture,
                                           std::string model_id) {
  std::ifstream in(fixture);
  if (!in) throw NotFoundError("cannot open scripted LLM fixture " + fixture.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed scripted LLM fixture: ") + e.what(), e.byte);
  }
  auto m = std::unique_ptr<MockLLM>(new MockLLM(Behavior::scripted, std::move(model_id)));
  if (doc.contains("replies")) {
    for (const auto& [question, reply] : doc["replies"].items()) {
      if (reply.is_object() && reply.contains("error")) {
        m->failures_[question] = reply["error"].get<std::string>();
      } else {
        m->replies_[question] = reply.get<std::string>();
      }
    }
  }
  m->fallback_ = doc.value("default", std::string(kNoInformationReply));
  return m;
}

LlmReply MockLLM::complete(const std::string& prompt, const DecodeParams&) {
  if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
  if (behavior_ == Behavior::echo_context) {
    const std::string context = prompt_context(prompt);
    if (is_blank(context)) return {std::string(kNoInformationReply), std::nullopt};
    return {first_sentence(context), std::nullopt};
  }
  const std::string query = prompt_query(prompt);
  if (auto f = failures_.find(query); f != failures_.end()) {
    throw TransportError("scripted failure: " + f->second, 1);
  }
  auto it = replies_.find(query);
  return {it == replies_.end() ? fallback_ : it->second, std::nullopt};
}

HttpLLM::HttpLLM(std::string endpoint, std::string model, Dialect dialect, double timeout_s,
                 int retries)
    : endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      dialect_(dialect),
      timeout_s_(timeout_s),
      retries_(retries) {}

LlmReply HttpLLM::complete(const std::string& prompt, const DecodeParams& params) {
  const nlohmann::json options{{"temperature", params.temperature},
                               {"top_k", params.top_k},
                               {"seed", params.seed}};
  if (dialect_ == Dialect::ollama) {
    const auto ep = detail::parse_endpoint(endpoint_);
    const auto reply = detail::post_json(
        ep.origin + "/api/generate",
        {{"model", model_}, {"prompt", prompt}, {"stream", false}, {"options", options}}, timeout_s_,
        retries_);
    if (!reply.contains("response") || !reply["response"].is_string()) {
      throw ProviderContractError(endpoint_ + " reply lacks 'response'");
    }
    LlmReply out{reply["response"].get<std::string>(), std::nullopt};
    if (reply.contains("eval_count") && reply["eval_count"].is_number_integer()) {
      out.tokens = reply["eval_count"].get<int>();
    }
    return out;
  }
  const auto reply = detail::post_json(
      endpoint_, {{"model", model_}, {"prompt", prompt}, {"params", options}}, timeout_s_, retries_);
  if (!reply.contains("answer") || !reply["answer"].is_string()) {
    throw ProviderContractError(endpoint_ + " reply lacks 'answer'");
  }
  LlmReply out{reply["answer"].get<std::string>(), std::nullopt};
  if (reply.contains("tokens") && reply["tokens"].is_number_integer()) {
    out.tokens = reply["tokens"].get<int>();
  }
  return out;
}

std::unique_ptr<LLMProvider> make_llm_provider(const std::string& model_id,
                                               const std::map<std::string, std::string>& endpoints,
                                               const RuntimeOptions& runtime,
                                               const std::filesystem::path& base_dir) {
  if (model_id == "mock:echo-context") return MockLLM::echo_context(model_id);
  if (model_id.rfind("mock:scripted", 0) == 0) {
    auto it = endpoints.find("llm_script");
    if (it == endpoints.end()) throw ArgumentError(model_id + " needs providers.llm_script");
    return MockLLM::scripted(resolve(base_dir, it->second), model_id);
  }
  auto it = endpoints.find("llm");
  if (it == endpoints.end()) throw ArgumentError("LLM '" + model_id + "' needs providers.llm");
  std::string url = it->second;
  auto dialect = HttpLLM::Dialect::native;
  if (url.rfind("ollama:", 0) == 0) {
    dialect = HttpLLM::Dialect::ollama;
    url = url.substr(7);
  }
  return std::make_unique<HttpLLM>(url, model_id, dialect, runtime.request_timeout_s, runtime.retries);
}

}  // namespace ragebench
