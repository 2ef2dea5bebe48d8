#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "ragebench/errors.hpp"
#include "ragebench/orchestrator.hpp"
#include "test_support.hpp"

using namespace ragebench;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json base_config(const testkit::TempDir& dir, std::size_t sample) {
  return json{{"datasets", {{{"name", "desk"}, {"path", testkit::fixture("desk_qa.json").string()}}}},
              {"sample_size", sample},
              {"seed", 3},
              {"grid", {{"llms", {"mock:echo-context"}}, {"embedders", {"reference"}}, {"top_k", {2}}}},
              {"output_dir", (dir / "out").string()},
              {"runtime", {{"sampling_period_ms", 20}}}};
}

ExperimentConfig make(const json& j) { return validate_config(j.dump()); }

ScriptedProbe flat_probe() {
  return ScriptedProbe([](const TrialTag&, std::size_t) { return ProbeReading{5.0, 1000, 2000, std::nullopt}; },
                       false);
}

void seed_history(const fs::path& out, const CombinationSpec& c, double gen_s, double ret_s) {
  HistoryStore store(out);
  for (std::size_t k = 0; k < 2; ++k) {
    HistoryEntry e;
    e.session_id = "earlier";
    e.combination = c;
    e.instance = k;
    e.generation_latency_s = gen_s;
    e.retrieval_latency_s = ret_s;
    e.total_latency_s = gen_s + ret_s;
    store.append(e);
  }
}

std::vector<TrialRecord> records_of(const ExperimentConfig& cfg, const SessionState& s) {
  return load_session_records(cfg.output_dir, s.session_id);
}

}  // namespace

TEST(Orchestrator, SingleCombinationRecordsEveryInstance) {
  testkit::TempDir dir;
  const auto cfg = make(base_config(dir, 3));
  auto probe = flat_probe();
  std::vector<std::uint64_t> revisions;
  OrchestratorOptions opts;
  opts.probe = &probe;
  opts.on_progress = [&](std::shared_ptr<const SessionState> s) { revisions.push_back(s->revision); };
  const auto state = run_session(cfg, opts);
  ASSERT_EQ(state.phase, SessionPhase::done) << state.error.value_or("");
  EXPECT_EQ(state.trials_executed, 3u);
  EXPECT_EQ(state.completed.size(), 1u);
  ASSERT_TRUE(state.best_combination_id.has_value());
  EXPECT_TRUE(std::is_sorted(revisions.begin(), revisions.end()));

  const auto records = records_of(cfg, state);
  ASSERT_EQ(records.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& r = records[k];
    EXPECT_EQ(r.instance, k);
    EXPECT_EQ(r.status, TrialStatus::ok);
    EXPECT_EQ(r.retrieved.size(), 2u);
    EXPECT_FALSE(r.answer.empty());
    ASSERT_TRUE(r.telemetry.has_value());
    EXPECT_GE(r.telemetry->sample_count, 2u);
    EXPECT_FALSE(r.telemetry->vram_available());
    EXPECT_TRUE(r.metrics.faithfulness.has_value());
    EXPECT_GE(r.latency.total_latency_s, r.latency.retrieval_latency_s + r.latency.generation_latency_s - 1e-9);
  }
  const auto paths = session_paths(cfg.output_dir, state.session_id);
  for (const auto& p : {paths.config_snapshot, paths.trials, paths.telemetry, paths.recommendation,
                        paths.best_config, paths.state}) {
    EXPECT_TRUE(fs::exists(p)) << p;
  }
  EXPECT_TRUE(fs::exists(HistoryStore(cfg.output_dir).log_path()));
  EXPECT_NO_THROW(load_config_file(paths.best_config));
}

TEST(Orchestrator, GenerationIntervalsDoNotOverlap) {
  testkit::TempDir dir;
  auto j = base_config(dir, 4);
  j["grid"]["top_k"] = {1, 3};
  const auto cfg = make(j);
  auto probe = flat_probe();
  OrchestratorOptions opts;
  opts.probe = &probe;
  const auto state = run_session(cfg, opts);
  auto records = records_of(cfg, state);
  ASSERT_EQ(records.size(), 8u);
  std::sort(records.begin(), records.end(),
            [](const TrialRecord& a, const TrialRecord& b) { return a.generation_started_s < b.generation_started_s; });
  for (std::size_t i = 0; i + 1 < records.size(); ++i) {
    EXPECT_LE(records[i].generation_started_s, records[i].generation_finished_s);
    EXPECT_LE(records[i].generation_finished_s, records[i + 1].generation_started_s);
  }
}

TEST(Orchestrator, HistoryPrunesBeforeRunning) {
  testkit::TempDir dir;
  auto j = base_config(dir, 2);
  j["grid"]["llms"] = {"mock:echo-context", "mock:scripted"};
  j["providers"] = {{"llm_script", testkit::fixture("scripted_llm.json").string()}};
  j["thresholds"] = {{"max_generation_latency_s", 5.0}};
  const auto cfg = make(j);
  const auto combos = enumerate_combinations(cfg.grid);
  seed_history(cfg.output_dir, combos[1], 10.0, 0.1);

  auto probe = flat_probe();
  OrchestratorOptions opts;
  opts.probe = &probe;
  const auto state = run_session(cfg, opts);
  ASSERT_EQ(state.phase, SessionPhase::done);
  EXPECT_EQ(state.completed, std::vector<std::string>{combos[0].id});
  ASSERT_EQ(state.skipped.size(), 1u);
  EXPECT_EQ(state.skipped[0].combination_id, combos[1].id);
  EXPECT_EQ(state.skipped[0].stage, "planning");
  ASSERT_EQ(state.skipped[0].reasons.size(), 1u);
  EXPECT_EQ(state.skipped[0].reasons[0], (PruneReason{"max_generation_latency_s", 10.0, 5.0}));
  for (const auto& r : records_of(cfg, state)) EXPECT_EQ(r.combination_id, combos[0].id);
}

TEST(Orchestrator, VramBreachInterruptsOnlyThatCombination) {
  testkit::TempDir dir;
  auto j = base_config(dir, 3);
  j["grid"]["top_k"] = {1, 2, 3};
  j["thresholds"] = {{"max_vram_bytes", 5000000000ULL}};
  const auto cfg = make(j);
  const auto combos = enumerate_combinations(cfg.grid);
  ScriptedProbe probe(
      [](const TrialTag& tag, std::size_t) {
        return ProbeReading{1.0, 1, 1, tag.combination_ordinal == 1 ? 9000000000ULL : 1000000000ULL};
      },
      true);
  OrchestratorOptions opts;
  opts.probe = &probe;
  const auto state = run_session(cfg, opts);
  ASSERT_EQ(state.phase, SessionPhase::done);
  EXPECT_EQ(state.completed, (std::vector<std::string>{combos[0].id, combos[2].id}));
  ASSERT_EQ(state.skipped.size(), 1u);
  EXPECT_EQ(state.skipped[0].combination_id, combos[1].id);
  EXPECT_EQ(state.skipped[0].stage, "in_run");
  EXPECT_EQ(state.skipped[0].reasons[0].threshold, "max_vram_bytes");
  EXPECT_EQ(state.skipped[0].reasons[0].value, 9e9);

  std::size_t interrupted = 0;
  for (const auto& r : records_of(cfg, state)) {
    if (r.combination_id != combos[1].id) {
      EXPECT_EQ(r.status, TrialStatus::ok);
      continue;
    }
    ++interrupted;
    EXPECT_EQ(r.status, TrialStatus::interrupted);
    EXPECT_TRUE(r.breach.has_value());
  }
  EXPECT_EQ(interrupted, 1u);
  EXPECT_NE(state.best_combination_id, combos[1].id);

  const auto history = HistoryStore(cfg.output_dir).load();
  EXPECT_EQ(history.max_vram.at(combos[1].id), 9000000000ULL);
  EXPECT_TRUE(should_skip(combos[1], history, cfg.thresholds).skip());
}

TEST(Orchestrator, ResumeSkipsLoggedPairs) {
  testkit::TempDir dir;
  auto j = base_config(dir, 3);
  j["grid"]["top_k"] = {1, 2};
  const auto cfg = make(j);
  auto probe = flat_probe();
  OrchestratorOptions opts;
  opts.probe = &probe;
  const auto first = run_session(cfg, opts);
  ASSERT_EQ(first.trials_executed, 6u);

  const auto again = run_session(cfg, opts);
  EXPECT_EQ(again.session_id, first.session_id);
  EXPECT_EQ(again.trials_executed, 0u);
  EXPECT_EQ(again.trials_resumed, 6u);
  EXPECT_EQ(again.best_combination_id, first.best_combination_id);

  const auto trials = session_paths(cfg.output_dir, first.session_id).trials;
  auto text = testkit::read_text(trials);
  text.pop_back();
  text.erase(text.rfind('\n') + 1);
  testkit::write_text(trials, text);
  const auto third = run_session(cfg, opts);
  EXPECT_EQ(third.trials_executed, 1u);
  EXPECT_EQ(records_of(cfg, third).size(), 6u);
}

TEST(Orchestrator, ProviderOutageFailsTrialsNotTheSession) {
  testkit::StubServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("{}", "application/json");
  });
  testkit::TempDir dir;
  auto j = base_config(dir, 2);
  j["grid"]["llms"] = {"remote-model"};
  j["providers"] = {{"llm", server.url("/generate")}};
  j["runtime"]["retries"] = 0;
  j["runtime"]["request_timeout_s"] = 2.0;
  const auto cfg = make(j);
  auto probe = flat_probe();
  OrchestratorOptions opts;
  opts.probe = &probe;
  const auto state = run_session(cfg, opts);
  EXPECT_EQ(state.phase, SessionPhase::done);
  EXPECT_EQ(state.failed.size(), 1u);
  EXPECT_FALSE(state.best_combination_id.has_value());
  const auto records = records_of(cfg, state);
  ASSERT_EQ(records.size(), 2u);
  for (const auto& r : records) {
    EXPECT_EQ(r.status, TrialStatus::failed);
    ASSERT_FALSE(r.warnings.empty());
  }
}

TEST(Orchestrator, CancelEndsAborted) {
  testkit::TempDir dir;
  const auto cfg = make(base_config(dir, 2));
  auto probe = flat_probe();
  std::atomic<bool> cancel{true};
  OrchestratorOptions opts;
  opts.probe = &probe;
  opts.cancel = &cancel;
  const auto state = run_session(cfg, opts);
  EXPECT_EQ(state.phase, SessionPhase::aborted);
  EXPECT_TRUE(state.error.has_value());
}

TEST(Estimate, GivenPerLineTimeOverSurvivors) {
  testkit::TempDir dir;
  auto j = base_config(dir, 10);
  j["grid"]["top_k"] = {1, 2, 3, 4};
  j["thresholds"] = {{"max_retrieval_latency_s", 5.0}};
  const auto cfg = make(j);
  seed_history(cfg.output_dir, enumerate_combinations(cfg.grid)[3], 0.1, 10.0);
  auto probe = flat_probe();
  OrchestratorOptions opts;
  opts.probe = &probe;
  const auto est = estimate_session(cfg, opts, 2.0);
  EXPECT_EQ(est.source, "given");
  EXPECT_EQ(est.instances, 10u);
  EXPECT_EQ(est.combinations, 3u);
  EXPECT_EQ(est.skipped, 1u);
  EXPECT_DOUBLE_EQ(est.seconds, 60.0);

  const auto from_history = estimate_session(cfg, opts);
  EXPECT_EQ(from_history.source, "history");
  EXPECT_NEAR(from_history.per_line_seconds, 10.1, 1e-12);
}

TEST(Estimate, NothingLeftCostsNothing) {
  testkit::TempDir dir;
  auto j = base_config(dir, 5);
  j["thresholds"] = {{"max_generation_latency_s", 1.0}};
  const auto cfg = make(j);
  seed_history(cfg.output_dir, enumerate_combinations(cfg.grid)[0], 3.0, 0.0);
  auto probe = flat_probe();
  OrchestratorOptions opts;
  opts.probe = &probe;
  const auto est = estimate_session(cfg, opts, 2.0);
  EXPECT_EQ(est.combinations, 0u);
  EXPECT_EQ(est.seconds, 0.0);
}

TEST(Estimate, CalibratesWithoutHistory) {
  testkit::TempDir dir;
  auto j = base_config(dir, 5);
  j["grid"]["top_k"] = {1, 2};
  const auto cfg = make(j);
  auto probe = flat_probe();
  OrchestratorOptions opts;
  opts.probe = &probe;
  const auto est = estimate_session(cfg, opts);
  EXPECT_EQ(est.source, "calibration");
  EXPECT_GT(est.per_line_seconds, 0.0);
  EXPECT_DOUBLE_EQ(est.seconds, estimate_cost(est.per_line_seconds, 5, 2));
  EXPECT_FALSE(fs::exists(session_paths(cfg.output_dir, config_fingerprint(cfg)).trials));
}

TEST(Export, LinesAreStableAndRoundTrip) {
  testkit::TempDir dir;
  auto j = base_config(dir, 3);
  j["grid"]["top_k"] = {1, 2};
  const auto cfg = make(j);
  auto probe = flat_probe();
  OrchestratorOptions opts;
  opts.probe = &probe;
  const auto state = run_session(cfg, opts);

  std::ostringstream a, b;
  EXPECT_EQ(export_results(cfg.output_dir, state.session_id, a), 6u);
  EXPECT_EQ(export_results(cfg.output_dir, state.session_id, b), 6u);
  EXPECT_EQ(a.str(), b.str());
  const auto records = records_of(cfg, state);
  std::istringstream in(a.str());
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) EXPECT_EQ(trial_from_json(json::parse(line)), records.at(i++));
  EXPECT_EQ(i, 6u);

  const auto summary = export_summary(cfg.output_dir, state.session_id);
  EXPECT_EQ(summary.at("state").at("session_id"), state.session_id);
  EXPECT_EQ(summary.at("recommendation").at("best").at("combination_id"), *state.best_combination_id);
  std::ostringstream sink;
  EXPECT_THROW(export_results(cfg.output_dir, "nope", sink), NotFoundError);
}
