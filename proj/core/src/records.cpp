#include "ragebench/records.hpp"

#include "ragebench/errors.hpp"

namespace ragebench {

using nlohmann::json;

namespace {

constexpr std::string_view kMetricIds[] = {"hallucination", "faithfulness", "answer_relevancy",
                                           "context_precision", "context_recall"};

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

template <typename T>
T field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(key, e.what());
  }
}

}  // namespace

std::string_view to_string(TrialStatus s) {
  switch (s) {
    case TrialStatus::ok: return "ok";
    case TrialStatus::failed: return "failed";
    case TrialStatus::interrupted: return "interrupted";
  }
  return "failed";
}

std::optional<TrialStatus> parse_trial_status(std::string_view s) {
  if (s == "ok") return TrialStatus::ok;
  if (s == "failed") return TrialStatus::failed;
  if (s == "interrupted") return TrialStatus::interrupted;
  return std::nullopt;
}

bool operator==(const MetricScores& a, const MetricScores& b) {
  return a.hallucination == b.hallucination && a.faithfulness == b.faithfulness &&
         a.answer_relevancy == b.answer_relevancy && a.context_precision == b.context_precision &&
         a.context_recall == b.context_recall;
}

bool operator==(const TrialRecord& a, const TrialRecord& b) {
  return to_json(a) == to_json(b);
}

json to_json(const MetricScores& m) {
  json j = json::object();
  for (auto id : kMetricIds) j[std::string(id)] = optional_number(m.get(id));
  return j;
}

MetricScores metric_scores_from_json(const json& j) {
  auto get = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_number()) throw ValidationError(std::string("metrics.") + key, "expected a number or null");
    return j[key].get<double>();
  };
  MetricScores m;
  m.hallucination = get("hallucination");
  m.faithfulness = get("faithfulness");
  m.answer_relevancy = get("answer_relevancy");
  m.context_precision = get("context_precision");
  m.context_recall = get("context_recall");
  return m;
}

json to_json(const TrialRecord& r) {
  json retrieved = json::array();
  for (const auto& item : r.retrieved) {
    retrieved.push_back({{"chunk_id", item.chunk_id}, {"score", item.score}, {"provenance", item.provenance}});
  }
  return json{{"schema", kTrialSchema},
              {"session_id", r.session_id},
              {"combination_id", r.combination_id},
              {"combination_ordinal", r.combination_ordinal},
              {"instance", r.instance},
              {"dataset", r.dataset},
              {"source_id", r.source_id},
              {"question", r.question},
              {"expected_answer", r.expected_answer},
              {"retrieved", std::move(retrieved)},
              {"answer", r.answer},
              {"tokens_generated", r.tokens_generated},
              {"tokens_per_second", r.tokens_per_second},
              {"metrics", to_json(r.metrics)},
              {"latency", to_json(r.latency)},
              {"telemetry", r.telemetry ? to_json(*r.telemetry) : json(nullptr)},
              {"status", to_string(r.status)},
              {"breach", r.breach ? json(*r.breach) : json(nullptr)},
              {"warnings", r.warnings},
              {"started_at", r.started_at},
              {"generation_started_s", r.generation_started_s},
              {"generation_finished_s", r.generation_finished_s}};
}

TrialRecord trial_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("record", "expected an object");
  if (field<std::string>(j, "schema") != kTrialSchema) {
    throw ValidationError("schema", "unsupported trial record schema");
  }
  TrialRecord r;
  r.session_id = field<std::string>(j, "session_id");
  r.combination_id = field<std::string>(j, "combination_id");
  r.combination_ordinal = field<std::size_t>(j, "combination_ordinal");
  r.instance = field<std::size_t>(j, "instance");
  r.dataset = field<std::string>(j, "dataset");
  r.source_id = field<std::string>(j, "source_id");
  r.question = field<std::string>(j, "question");
  r.expected_answer = field<std::string>(j, "expected_answer");
  for (const auto& item : field<json>(j, "retrieved")) {
    r.retrieved.push_back(RetrievedRef{field<std::string>(item, "chunk_id"), field<double>(item, "score"),
                                       field<std::string>(item, "provenance")});
  }
  r.answer = field<std::string>(j, "answer");
  r.tokens_generated = field<std::int64_t>(j, "tokens_generated");
  r.tokens_per_second = field<double>(j, "tokens_per_second");
  r.metrics = metric_scores_from_json(field<json>(j, "metrics"));
  try {
    r.latency = latency_from_json(j.at("latency"));
    if (!j.at("telemetry").is_null()) r.telemetry = summary_from_json(j["telemetry"]);
  } catch (const json::exception& e) {
    throw ValidationError("latency/telemetry", e.what());
  }
  auto status = parse_trial_status(field<std::string>(j, "status"));
  if (!status) throw ValidationError("status", "unknown trial status");
  r.status = *status;
  if (!field<json>(j, "breach").is_null()) r.breach = field<std::string>(j, "breach");
  r.warnings = field<std::vector<std::string>>(j, "warnings");
  r.started_at = field<std::string>(j, "started_at");
  r.generation_started_s = field<double>(j, "generation_started_s");
  r.generation_finished_s = field<double>(j, "generation_finished_s");
  return r;
}

std::string to_json_line(const TrialRecord& r) {
  return to_json(r).dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace ragebench
