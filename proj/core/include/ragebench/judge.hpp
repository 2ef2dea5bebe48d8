#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragebench/config.hpp"
#include "ragebench/embeddings.hpp"

namespace ragebench {

// --- formulas -------------------------------------------------------------
// Each returns nullopt where the formula is undefined (empty input).

/// 1 - contradicted / contexts.
std::optional<double> hallucination_score(const std::vector<bool>& contradicted);
/// supported claims / claims.
std::optional<double> faithfulness_score(const std::vector<bool>& supported);
/// Sum over ranks k of (relevant in top k / k) * r_k, over the relevant count.
/// No relevant node scores 0; an empty list is undefined.
std::optional<double> context_precision(const std::vector<bool>& relevant);
/// attributable statements / statements.
std::optional<double> context_recall(const std::vector<bool>& attributable);

/// Mean cosine between `reference` and each potential question, clamped to [0, 1].
std::optional<double> answer_relevancy_from_questions(const std::string& reference,
                                                      const std::vector<std::string>& potential,
                                                      EmbeddingProvider& embedder);

/// Sentences ending in . ? or ! followed by whitespace (or end of text).
std::vector<std::string> decompose_answer(std::string_view text);

// --- judge protocol --------------------------------------------------------

enum class JudgeTask {
  contradiction,          // one flag per retrieved context: contradicts the answer?
  claim_support,          // one flag per answer claim: supported by the contexts?
  statement_attribution,  // one flag per expected-output statement: attributable?
  node_relevance,         // one flag per retrieved node, rank order
  question_generation,    // n questions the answer would respond to
};
std::string_view to_string(JudgeTask task);
std::optional<JudgeTask> parse_judge_task(std::string_view s);

struct JudgeRequest {
  JudgeTask task = JudgeTask::contradiction;
  std::string trial_id;
  std::string question;
  std::string answer;
  std::string expected_output;
  std::vector<std::string> contexts;
  std::vector<std::string> items;  // claims or statements under test
  int n = 0;
};

struct JudgeResponse {
  std::vector<bool> flags;
  std::vector<std::string> questions;
};

/// Renders the fixed instruction prompt sent to an LLM judge for `request`.
std::string render_judge_prompt(const JudgeRequest& request);

class JudgeProvider {
 public:
  virtual ~JudgeProvider() = default;
  virtual const std::string& model_id() const = 0;
  virtual JudgeResponse judge(const JudgeRequest& request) = 0;
};

/// Verdicts from a fixture keyed by trial id then task; a "*" entry applies
/// to trials without their own (docs/providers.md#scripted-judge).
class ScriptedJudge final : public JudgeProvider {
 public:
  explicit ScriptedJudge(nlohmann::json fixture, std::string model_id = "mock:scripted-judge");
  static std::unique_ptr<ScriptedJudge> from_file(const std::filesystem::path& path);
  const std::string& model_id() const override { return model_id_; }
  JudgeResponse judge(const JudgeRequest& request) override;

 private:
  nlohmann::json fixture_;
  std::string model_id_;
};

/// Deterministic offline judge based on content-token overlap. It is a
/// stand-in for pipeline testing, not a quality judge.
class LexicalJudge final : public JudgeProvider {
 public:
  const std::string& model_id() const override { return model_id_; }
  JudgeResponse judge(const JudgeRequest& request) override;

 private:
  std::string model_id_ = "builtin:lexical-judge";
};

/// POST {model, task, trial_id, prompt, expected} -> {flags: [...]} or {questions: [...]}.
class HttpJudge final : public JudgeProvider {
 public:
  HttpJudge(std::string endpoint, std::string model, double timeout_s, int retries);
  const std::string& model_id() const override { return model_; }
  JudgeResponse judge(const JudgeRequest& request) override;

 private:
  std::string endpoint_;
  std::string model_;
  double timeout_s_;
  int retries_;
};

/// providers.judge: absent or "builtin:lexical" -> LexicalJudge, "file:<path>" ->
/// ScriptedJudge, otherwise HTTP (model from providers.judge_model).
std::unique_ptr<JudgeProvider> make_judge(const std::map<std::string, std::string>& endpoints,
                                          const RuntimeOptions& runtime,
                                          const std::filesystem::path& base_dir = {});

// --- per-trial evaluation ----------------------------------------------------

struct JudgeVerdicts {
  std::vector<bool> contradicted_flags;
  std::vector<bool> claim_support_flags;
  std::vector<bool> relevance_flags;
  std::vector<bool> attributable_flags;
  std::vector<std::string> potential_questions;
};

struct MetricScores {
  std::optional<double> hallucination;
  std::optional<double> faithfulness;
  std::optional<double> answer_relevancy;
  std::optional<double> context_precision;
  std::optional<double> context_recall;

  std::optional<double> get(std::string_view metric) const;
};

struct EvaluationInput {
  std::string trial_id;
  std::string question;
  std::string answer;
  std::string expected_output;
  std::vector<std::string> contexts;
};

struct Evaluation {
  JudgeVerdicts verdicts;
  MetricScores scores;
  std::vector<std::string> warnings;
};

/// Asks the judge for every task and applies the formulas. Judge or embedding
/// failures leave the affected metric undefined and add a warning.
Evaluation evaluate_trial(const EvaluationInput& input, JudgeProvider& judge,
                          EmbeddingProvider& embedder, int potential_questions,
                          RelevancyOperands operands);

}  // namespace ragebench
