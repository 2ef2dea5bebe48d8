#include <gtest/gtest.h>

#include "ragebench/errors.hpp"
#include "ragebench/text.hpp"
#include "ragebench/generator.hpp"
#include "test_support.hpp"

using namespace ragebench;
using nlohmann::json;

namespace {

class CountingLLM final : public LLMProvider {
 public:
  const std::string& model_id() const override { return id_; }
  LlmReply complete(const std::string&, const DecodeParams&) override {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    return {"whatever", 50};
  }

 private:
  std::string id_ = "counting";
};

}  // namespace

TEST(Prompt, MatchesGolden) {
  const auto kase = testkit::read_json(testkit::fixture("prompt_case.json"));
  const auto prompt = build_prompt(kase.at("query").get<std::string>(),
                                   kase.at("chunks").get<std::vector<std::string>>());
  EXPECT_EQ(prompt, testkit::read_text(testkit::fixture("golden/prompt.txt")));
}

TEST(Prompt, EmptyContextBlock) {
  const auto prompt = build_prompt("Who?", std::vector<std::string>{});
  EXPECT_NE(prompt.find("Here is the user query: Who?"), std::string::npos);
  EXPECT_TRUE(is_blank(prompt_context(prompt)));
  EXPECT_EQ(prompt_query(prompt), "Who?");
}

TEST(Prompt, ChunksInRankOrderBeforeQuery) {
  const auto prompt = build_prompt("q", std::vector<std::string>{"FIRST chunk", "SECOND chunk"});
  const auto first = prompt.find("FIRST"), second = prompt.find("SECOND"), query = prompt.find("Here is the user query");
  EXPECT_LT(first, second);
  EXPECT_LT(second, query);
  EXPECT_EQ(prompt_context(prompt), "FIRST chunk\n\nSECOND chunk");
}

TEST(Prompt, TemplateHasBothSlots) {
  EXPECT_NE(prompt_template().find("{similar_chunks}"), std::string_view::npos);
  EXPECT_NE(prompt_template().find("{query}"), std::string_view::npos);
}

TEST(MockLLM, EchoContextAnswersFirstSentence) {
  auto llm = MockLLM::echo_context();
  const auto prompt = build_prompt("q", std::vector<std::string>{"The bridge opened in 1989. It is long."});
  EXPECT_EQ(llm->complete(prompt, {}).text, "The bridge opened in 1989.");
  EXPECT_EQ(llm->complete(build_prompt("q", std::vector<std::string>{}), {}).text, kNoInformationReply);
}

TEST(MockLLM, ScriptedRepliesAreDeterministic) {
  auto llm = MockLLM::scripted(testkit::fixture("scripted_llm.json"));
  const auto prompt = build_prompt("When did the Larkspur Bridge open?", std::vector<std::string>{"ctx"});
  const auto a = llm->complete(prompt, {}).text;
  EXPECT_EQ(a, "The Larkspur Bridge opened in 1989.");
  EXPECT_EQ(llm->complete(prompt, {}).text, a);
  EXPECT_EQ(llm->complete(build_prompt("Unscripted?", std::vector<std::string>{}), {}).text,
            "No relevant information provided.");
}

TEST(MockLLM, ScriptedFailuresThrow) {
  testkit::TempDir dir;
  testkit::write_text(dir / "f.json", R"({"replies": {"boom?": {"error": "provider down"}}})");
  auto llm = MockLLM::scripted(dir / "f.json");
  EXPECT_THROW(llm->complete(build_prompt("boom?", std::vector<std::string>{}), {}), TransportError);
}

TEST(Generate, InjectedDelayIsMeasured) {
  auto llm = MockLLM::echo_context();
  llm->set_delay(std::chrono::milliseconds(100));
  const auto rec = generate(*llm, build_prompt("q", std::vector<std::string>{"One two three."}), {});
  EXPECT_GE(rec.generation_latency_s, 0.1);
  EXPECT_EQ(rec.tokens_generated, 3);
  EXPECT_EQ(rec.model_id, "mock:echo-context");
}

TEST(Generate, ThroughputIsTokensOverLatency) {
  CountingLLM llm;
  const auto rec = generate(llm, "p", {});
  EXPECT_EQ(rec.tokens_generated, 50);
  EXPECT_DOUBLE_EQ(rec.tokens_per_second, 50.0 / rec.generation_latency_s);
  EXPECT_EQ(whitespace_tokens("  a  b\tc\n"), 3);
}

TEST(HttpLLM, NativeContract) {
  testkit::StubServer server([](const httplib::Request& req, httplib::Response& res) {
    const auto body = json::parse(req.body);
    EXPECT_EQ(body.at("model"), "small");
    EXPECT_EQ(body.at("params").at("temperature"), 0.0);
    res.set_content(json{{"answer", "42"}, {"tokens", 7}}.dump(), "application/json");
  });
  HttpLLM llm(server.url("/generate"), "small", HttpLLM::Dialect::native, 5.0, 0);
  const auto reply = llm.complete("prompt", {});
  EXPECT_EQ(reply.text, "42");
  EXPECT_EQ(reply.tokens, 7);
}

TEST(HttpLLM, OllamaDialect) {
  std::string seen_path;
  testkit::StubServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen_path = req.path;
    EXPECT_FALSE(json::parse(req.body).at("stream").get<bool>());
    res.set_content(R"({"response": "hi", "eval_count": 2})", "application/json");
  });
  RuntimeOptions rt;
  auto llm = make_llm_provider("llama3", {{"llm", "ollama:" + server.url()}}, rt);
  EXPECT_EQ(llm->complete("p", {}).text, "hi");
  EXPECT_EQ(seen_path, "/api/generate");
}

TEST(HttpLLM, MissingAnswerIsAContractError) {
  testkit::StubServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content("{}", "application/json");
  });
  HttpLLM llm(server.url("/g"), "m", HttpLLM::Dialect::native, 5.0, 0);
  EXPECT_THROW(llm.complete("p", {}), ProviderContractError);
}

TEST(HttpLLM, FactoryNeedsEndpoints) {
  RuntimeOptions rt;
  EXPECT_THROW(make_llm_provider("llama3", {}, rt), ArgumentError);
  EXPECT_THROW(make_llm_provider("mock:scripted", {}, rt), ArgumentError);
  EXPECT_EQ(make_llm_provider("mock:echo-context", {}, rt)->model_id(), "mock:echo-context");
}
