#include "ragebench/judge.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>

#include "http_transport.hpp"
#include "ragebench/errors.hpp"
#include "ragebench/text.hpp"

namespace ragebench {

using nlohmann::json;

namespace {

std::optional<double> fraction(const std::vector<bool>& flags) {
  if (flags.empty()) return std::nullopt;
  const auto hits = std::count(flags.begin(), flags.end(), true);
  return static_cast<double>(hits) / static_cast<double>(flags.size());
}

constexpr std::array<std::pair<std::string_view, JudgeTask>, 5> kTasks{{
    {"contradiction", JudgeTask::contradiction},
    {"claim_support", JudgeTask::claim_support},
    {"statement_attribution", JudgeTask::statement_attribution},
    {"node_relevance", JudgeTask::node_relevance},
    {"question_generation", JudgeTask::question_generation},
}};

// Judge instructions. Each asks for a strict structured reply so HTTP judges
// can be graded without free-text parsing.
constexpr std::string_view kContradictionPrompt =
    "For each CONTEXT below decide whether it contradicts the ANSWER.\n"
    "Reply with {\"flags\": [...]} holding one boolean per context, true when it contradicts.\n"
    "ANSWER: {answer}\n"
    "CONTEXTS:\n{contexts}";
constexpr std::string_view kClaimSupportPrompt =
    "For each CLAIM below decide whether it is supported by the CONTEXTS.\n"
    "Reply with {\"flags\": [...]} holding one boolean per claim, true when supported.\n"
    "CONTEXTS:\n{contexts}\n"
    "CLAIMS:\n{items}";
constexpr std::string_view kAttributionPrompt =
    "For each STATEMENT of the expected output decide whether it can be attributed to the CONTEXTS.\n"
    "Reply with {\"flags\": [...]} holding one boolean per statement, true when attributable.\n"
    "CONTEXTS:\n{contexts}\n"
    "STATEMENTS:\n{items}";
constexpr std::string_view kRelevancePrompt =
    "For each retrieved NODE decide whether it is relevant to the QUESTION given the EXPECTED OUTPUT.\n"
    "Reply with {\"flags\": [...]} holding one boolean per node in the given order.\n"
    "QUESTION: {question}\n"
    "EXPECTED OUTPUT: {expected}\n"
    "NODES:\n{contexts}";
constexpr std::string_view kQuestionPrompt =
    "Write {n} distinct questions that the ANSWER below would respond to.\n"
    "Reply with {\"questions\": [...]}.\n"
    "ANSWER: {answer}";

std::string numbered(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += std::to_string(i + 1) + ". " + items[i] + "\n";
  }
  return out;
}

std::string substitute(std::string_view tmpl, const JudgeRequest& r) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    const auto close = open == std::string_view::npos ? open : tmpl.find('}', open);
    if (open == std::string_view::npos || close == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    const auto name = tmpl.substr(open + 1, close - open - 1);
    out.append(tmpl.substr(pos, open - pos));
    if (name == "answer") {
      out += r.answer;
    } else if (name == "question") {
      out += r.question;
    } else if (name == "expected") {
      out += r.expected_output;
    } else if (name == "contexts") {
      out += numbered(r.contexts);
    } else if (name == "items") {
      out += numbered(r.items);
    } else if (name == "n") {
      out += std::to_string(r.n);
    } else {
      out.append(tmpl.substr(open, close - open + 1));  // literal braces in the reply format
    }
    pos = close + 1;
  }
  return out;
}

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words{
      "a",    "an",   "the",  "of",   "in",   "on",   "at",   "to",   "for",  "and", "or",
      "is",   "are",  "was",  "were", "be",   "by",   "with", "as",   "it",   "its", "this",
      "that", "what", "which", "who", "when", "where", "how", "did",  "does", "do",  "from",
      "has",  "have", "had",  "not",  "no",  "there", "their", "they", "he",  "she", "his",
      "her"};
  return words;
}

std::set<std::string> content_tokens(std::string_view text) {
  std::set<std::string> out;
  for (auto& t : tokenize(text)) {
    if (!stopwords().contains(t)) out.insert(std::move(t));
  }
  return out;
}

// Share of `probe`'s content tokens present in `pool`; nullopt when probe has none.
std::optional<double> coverage(const std::set<std::string>& probe, const std::set<std::string>& pool) {
  if (probe.empty()) return std::nullopt;
  std::size_t hit = 0;
  for (const auto& t : probe) hit += pool.contains(t) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(probe.size());
}

std::vector<bool> read_flags(const json& v, const std::string& where) {
  if (!v.is_array()) throw ProviderContractError(where + ": expected an array of booleans");
  std::vector<bool> out;
  for (const auto& f : v) {
    if (!f.is_boolean()) throw ProviderContractError(where + ": expected an array of booleans");
    out.push_back(f.get<bool>());
  }
  return out;
}

std::vector<std::string> read_questions(const json& v, const std::string& where) {
  if (!v.is_array()) throw ProviderContractError(where + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& q : v) {
    if (!q.is_string()) throw ProviderContractError(where + ": expected an array of strings");
    out.push_back(q.get<std::string>());
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, std::string p) {
  if (p.rfind("file:", 0) == 0) p = p.substr(5);
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

std::optional<double> hallucination_score(const std::vector<bool>& contradicted) {
  auto share = fraction(contradicted);
  if (!share) return std::nullopt;
  return 1.0 - *share;
}

std::optional<double> faithfulness_score(const std::vector<bool>& supported) {
  return fraction(supported);
}

std::optional<double> context_recall(const std::vector<bool>& attributable) {
  return fraction(attributable);
}

std::optional<double> context_precision(const std::vector<bool>& relevant) {
  if (relevant.empty()) return std::nullopt;
  double sum = 0.0;
  std::size_t seen = 0;
  for (std::size_t k = 1; k <= relevant.size(); ++k) {
    if (!relevant[k - 1]) continue;
    ++seen;
    sum += static_cast<double>(seen) / static_cast<double>(k);
  }
  return seen == 0 ? 0.0 : sum / static_cast<double>(seen);
}

std::optional<double> answer_relevancy_from_questions(const std::string& reference,
                                                      const std::vector<std::string>& potential,
                                                      EmbeddingProvider& embedder) {
  if (potential.empty()) return std::nullopt;
  std::vector<std::string> texts;
  texts.reserve(potential.size() + 1);
  texts.push_back(reference);
  texts.insert(texts.end(), potential.begin(), potential.end());
  const auto vectors = embed_texts(embedder, texts);
  double sum = 0.0;
  for (std::size_t i = 1; i < vectors.size(); ++i) {
    sum += cosine_similarity(vectors[0].view(), vectors[i].view());
  }
  return std::clamp(sum / static_cast<double>(potential.size()), 0.0, 1.0);
}

std::vector<std::string> decompose_answer(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto push = [&](std::size_t end) {
    auto piece = trim(text.substr(start, end - start));
    if (!piece.empty()) out.emplace_back(piece);
    start = end;
  };
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    const char c = text[i];
    const char next = text[i + 1];
    if ((c == '.' || c == '?' || c == '!') &&
        (next == ' ' || next == '\n' || next == '\t' || next == '\r')) {
      push(i + 1);
    }
  }
  push(text.size());
  return out;
}

std::string_view to_string(JudgeTask task) {
  for (const auto& [name, t] : kTasks) {
    if (t == task) return name;
  }
  return "contradiction";
}

std::optional<JudgeTask> parse_judge_task(std::string_view s) {
  for (const auto& [name, t] : kTasks) {
    if (name == s) return t;
  }
  return std::nullopt;
}

std::string render_judge_prompt(const JudgeRequest& request) {
  switch (request.task) {
    case JudgeTask::contradiction: return substitute(kContradictionPrompt, request);
    case JudgeTask::claim_support: return substitute(kClaimSupportPrompt, request);
    case JudgeTask::statement_attribution: return substitute(kAttributionPrompt, request);
    case JudgeTask::node_relevance: return substitute(kRelevancePrompt, request);
    case JudgeTask::question_generation: return substitute(kQuestionPrompt, request);
  }
  return {};
}

ScriptedJudge::ScriptedJudge(json fixture, std::string model_id)
    : fixture_(std::move(fixture)), model_id_(std::move(model_id)) {
  if (!fixture_.is_object() || !fixture_.contains("verdicts") || !fixture_["verdicts"].is_object()) {
    throw ArgumentError("scripted judge fixture needs a 'verdicts' object");
  }
}

std::unique_ptr<ScriptedJudge> ScriptedJudge::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open judge fixture " + path.string());
  try {
    return std::make_unique<ScriptedJudge>(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed judge fixture: ") + e.what(), e.byte);
  }
}

JudgeResponse ScriptedJudge::judge(const JudgeRequest& request) {
  const json& verdicts = fixture_["verdicts"];
  const std::string task(to_string(request.task));
  const json* entry = nullptr;
  for (const std::string& key : {request.trial_id, std::string("*")}) {
    if (verdicts.contains(key) && verdicts[key].contains(task)) {
      entry = &verdicts[key][task];
      break;
    }
  }
  if (entry == nullptr) {
    throw ProviderContractError("no scripted verdict for trial '" + request.trial_id + "' task " + task);
  }
  JudgeResponse r;
  const std::string where = "scripted judge " + request.trial_id + "/" + task;
  if (request.task == JudgeTask::question_generation) {
    r.questions = read_questions(*entry, where);
  } else {
    r.flags = read_flags(*entry, where);
  }
  return r;
}

JudgeResponse LexicalJudge::judge(const JudgeRequest& request) {
  JudgeResponse r;
  std::set<std::string> context_pool;
  for (const auto& c : request.contexts) {
    auto t = content_tokens(c);
    context_pool.insert(t.begin(), t.end());
  }
  switch (request.task) {
    case JudgeTask::contradiction: {
      const auto answer = content_tokens(request.answer);
      for (const auto& c : request.contexts) {
        auto cov = coverage(answer, content_tokens(c));
        r.flags.push_back(cov.has_value() && *cov == 0.0);
      }
      break;
    }
    case JudgeTask::claim_support:
    case JudgeTask::statement_attribution:
      for (const auto& item : request.items) {
        auto cov = coverage(content_tokens(item), context_pool);
        r.flags.push_back(cov.value_or(0.0) >= 0.5);
      }
      break;
    case JudgeTask::node_relevance: {
      const auto expected = content_tokens(request.expected_output);
      for (const auto& c : request.contexts) {
        auto cov = coverage(expected, content_tokens(c));
        r.flags.push_back(cov.value_or(0.0) >= 0.5);
      }
      break;
    }
    case JudgeTask::question_generation: {
      const auto sentences = decompose_answer(request.answer);
      std::vector<std::string> bases = sentences.empty() ? std::vector<std::string>{request.answer} : sentences;
      for (int i = 0; i < request.n; ++i) {
        std::string q(trim(bases[static_cast<std::size_t>(i) % bases.size()]));
        while (!q.empty() && (q.back() == '.' || q.back() == '!' || q.back() == '?')) q.pop_back();
        r.questions.push_back(q + "?");
      }
      break;
    }
  }
  return r;
}

HttpJudge::HttpJudge(std::string endpoint, std::string model, double timeout_s, int retries)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), timeout_s_(timeout_s), retries_(retries) {}

JudgeResponse HttpJudge::judge(const JudgeRequest& request) {
  std::size_t expected = 0;
  switch (request.task) {
    case JudgeTask::contradiction:
    case JudgeTask::node_relevance: expected = request.contexts.size(); break;
    case JudgeTask::claim_support:
    case JudgeTask::statement_attribution: expected = request.items.size(); break;
    case JudgeTask::question_generation: expected = static_cast<std::size_t>(request.n); break;
  }
  const json body{{"model", model_},
                  {"task", to_string(request.task)},
                  {"trial_id", request.trial_id},
                  {"prompt", render_judge_prompt(request)},
                  {"expected", expected}};
  const auto reply = detail::post_json(endpoint_, body, timeout_s_, retries_);
  JudgeResponse r;
  if (request.task == JudgeTask::question_generation) {
    r.questions = read_questions(reply.value("questions", json()), endpoint_);
  } else {
    r.flags = read_flags(reply.value("flags", json()), endpoint_);
  }
  return r;
}

std::unique_ptr<JudgeProvider> make_judge(const std::map<std::string, std::string>& endpoints,
                                          const RuntimeOptions& runtime,
                                          const std::filesystem::path& base_dir) {
  auto it = endpoints.find("judge");
  if (it == endpoints.end() || it->second == "builtin:lexical") {
    return std::make_unique<LexicalJudge>();
  }
  if (it->second.rfind("file:", 0) == 0) return ScriptedJudge::from_file(resolve(base_dir, it->second));
  auto model = endpoints.find("judge_model");
  return std::make_unique<HttpJudge>(it->second, model == endpoints.end() ? "judge" : model->second,
                                     runtime.request_timeout_s, runtime.retries);
}

std::optional<double> MetricScores::get(std::string_view metric) const {
  if (metric == "hallucination") return hallucination;
  if (metric == "faithfulness") return faithfulness;
  if (metric == "answer_relevancy") return answer_relevancy;
  if (metric == "context_precision") return context_precision;
  if (metric == "context_recall") return context_recall;
  return std::nullopt;
}

Evaluation evaluate_trial(const EvaluationInput& input, JudgeProvider& judge,
                          EmbeddingProvider& embedder, int potential_questions,
                          RelevancyOperands operands) {
  Evaluation ev;
  JudgeRequest base;
  base.trial_id = input.trial_id;
  base.question = input.question;
  base.answer = input.answer;
  base.expected_output = input.expected_output;
  base.contexts = input.contexts;

  auto ask = [&](JudgeTask task, std::vector<std::string> items, std::size_t expected_len,
                 std::vector<bool>& into) -> bool {
    JudgeRequest req = base;
    req.task = task;
    req.items = std::move(items);
    try {
      auto resp = judge.judge(req);
      if (resp.flags.size() != expected_len) {
        throw ProviderContractError("judge returned " + std::to_string(resp.flags.size()) +
                                    " verdicts, expected " + std::to_string(expected_len));
      }
      into = std::move(resp.flags);
      return true;
    } catch (const std::exception& e) {
      ev.warnings.push_back(std::string(to_string(task)) + ": " + e.what());
      return false;
    }
  };

  if (ask(JudgeTask::contradiction, {}, input.contexts.size(), ev.verdicts.contradicted_flags)) {
    ev.scores.hallucination = hallucination_score(ev.verdicts.contradicted_flags);
  }
  const auto claims = decompose_answer(input.answer);
  if (ask(JudgeTask::claim_support, claims, claims.size(), ev.verdicts.claim_support_flags)) {
    ev.scores.faithfulness = faithfulness_score(ev.verdicts.claim_support_flags);
  }
  if (ask(JudgeTask::node_relevance, {}, input.contexts.size(), ev.verdicts.relevance_flags)) {
    ev.scores.context_precision = context_precision(ev.verdicts.relevance_flags);
  }
  const auto statements = decompose_answer(input.expected_output);
  if (ask(JudgeTask::statement_attribution, statements, statements.size(),
          ev.verdicts.attributable_flags)) {
    ev.scores.context_recall = context_recall(ev.verdicts.attributable_flags);
  }

  try {
    JudgeRequest req = base;
    req.task = JudgeTask::question_generation;
    req.n = potential_questions;
    auto resp = judge.judge(req);
    ev.verdicts.potential_questions = std::move(resp.questions);
    if (ev.verdicts.potential_questions.empty()) {
      ev.warnings.push_back("question_generation: judge produced no questions");
    } else {
      const std::string& reference =
          operands == RelevancyOperands::question ? input.question : input.answer;
      ev.scores.answer_relevancy =
          answer_relevancy_from_questions(reference, ev.verdicts.potential_questions, embedder);
    }
  } catch (const std::exception& e) {
    ev.warnings.push_back(std::string("answer_relevancy: ") + e.what());
  }
  return ev;
}

}  // namespace ragebench
