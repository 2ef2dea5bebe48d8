#include "ragebench/orchestrator.hpp"

#include <unistd.h>

#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "ragebench/chunker.hpp"
#include "ragebench/dataset.hpp"
#include "ragebench/embeddings.hpp"
#include "ragebench/errors.hpp"
#include "ragebench/generator.hpp"
#include "ragebench/judge.hpp"
#include "ragebench/recommender.hpp"
#include "ragebench/retriever.hpp"
#include "ragebench/text.hpp"

namespace ragebench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(SessionPhase p) {
  switch (p) {
    case SessionPhase::planning: return "planning";
    case SessionPhase::indexing: return "indexing";
    case SessionPhase::running: return "running";
    case SessionPhase::aggregating: return "aggregating";
    case SessionPhase::done: return "done";
    case SessionPhase::aborted: return "aborted";
  }
  return "aborted";
}

json to_json(const SessionState& s) {
  json skipped = json::array();
  for (const auto& sk : s.skipped) {
    json reasons = json::array();
    for (const auto& r : sk.reasons) reasons.push_back(to_json(r));
    skipped.push_back({{"combination_id", sk.combination_id},
                       {"ordinal", sk.ordinal},
                       {"stage", sk.stage},
                       {"reasons", std::move(reasons)}});
  }
  json progress = json::array();
  for (const auto& p : s.progress) {
    progress.push_back({{"combination_id", p.combination_id},
                        {"ordinal", p.ordinal},
                        {"status", p.status},
                        {"done", p.done},
                        {"total", p.total},
                        {"preview", p.preview}});
  }
  return json{{"schema", "ragebench.session/1"},
              {"session_id", s.session_id},
              {"phase", to_string(s.phase)},
              {"planned", s.planned},
              {"skipped", std::move(skipped)},
              {"completed", s.completed},
              {"failed", s.failed},
              {"pending", s.pending},
              {"progress", std::move(progress)},
              {"trials_executed", s.trials_executed},
              {"trials_resumed", s.trials_resumed},
              {"warnings", s.warnings},
              {"best_combination_id", s.best_combination_id ? json(*s.best_combination_id) : json(nullptr)},
              {"error", s.error ? json(*s.error) : json(nullptr)},
              {"started_at", s.started_at},
              {"finished_at", s.finished_at},
              {"revision", s.revision}};
}

SessionPaths session_paths(const fs::path& output_dir, const std::string& session_id) {
  SessionPaths p;
  p.root = output_dir;
  p.session_dir = output_dir / "sessions" / session_id;
  p.config_snapshot = p.session_dir / "config.snapshot.json";
  p.trials = p.session_dir / "trials.jsonl";
  p.telemetry = p.session_dir / "telemetry.jsonl";
  p.recommendation = p.session_dir / "recommendation.json";
  p.best_config = p.session_dir / "best_config.json";
  p.state = p.session_dir / "session.json";
  p.index_dir = p.session_dir / "index";
  return p;
}

namespace {

constexpr const char* kMatrixMetrics[] = {
    "hallucination",     "faithfulness",       "answer_relevancy", "context_precision",  "context_recall",
    "retrieval_latency", "generation_latency", "mean_vram",        "tokens_per_second"};
constexpr const char* kQualityMetrics[] = {"hallucination", "faithfulness", "answer_relevancy",
                                           "context_precision", "context_recall"};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

/// Appends whole lines; `durable` adds an fsync per line.
class LineAppender {
 public:
  LineAppender(const fs::path& path, bool durable) : path_(path), durable_(durable) {
    fs::create_directories(path.parent_path());
    file_ = std::fopen(path.c_str(), "ab");
    if (file_ == nullptr) throw Error("cannot open " + path.string() + " for appending");
  }
  ~LineAppender() {
    if (file_) std::fclose(file_);
  }
  LineAppender(const LineAppender&) = delete;
  LineAppender& operator=(const LineAppender&) = delete;

  void write(const std::string& line) {
    std::lock_guard lock(mutex_);
    const bool ok = std::fwrite(line.data(), 1, line.size(), file_) == line.size() &&
                    std::fputc('\n', file_) != EOF && std::fflush(file_) == 0 &&
                    (!durable_ || ::fsync(fileno(file_)) == 0);
    if (!ok) throw Error("write to " + path_.string() + " failed");
  }

 private:
  fs::path path_;
  bool durable_;
  std::FILE* file_ = nullptr;
  std::mutex mutex_;
};

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<TrialRecord> read_trial_log(const fs::path& path) {
  std::vector<TrialRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      if (in.peek() == std::char_traits<char>::eof()) break;  // torn final append
      throw ParseError("malformed trial log line in " + path.string(), 0);
    }
    out.push_back(trial_from_json(j));
  }
  return out;
}

using PairKey = std::pair<std::string, std::size_t>;

std::map<PairKey, TrialRecord> last_per_pair(std::vector<TrialRecord> records, const std::string& session_id) {
  std::map<PairKey, TrialRecord> out;
  for (auto& r : records) {
    if (r.session_id != session_id) continue;
    PairKey key{r.combination_id, r.instance};
    out.insert_or_assign(std::move(key), std::move(r));
  }
  return out;
}

struct Instance {
  std::size_t dataset = 0;
  QARecord record;
};

struct Workload {
  std::vector<Corpus> corpora;
  std::vector<Instance> instances;
};

Workload load_workload(const ExperimentConfig& cfg, const fs::path& base) {
  Workload w;
  for (std::size_t d = 0; d < cfg.datasets.size(); ++d) {
    const auto& ref = cfg.datasets[d];
    Corpus corpus = load_corpus(resolve(base, ref.path), ref.format, ref.name);
    if (cfg.sample_size) corpus = sample_corpus(corpus, *cfg.sample_size, static_cast<std::uint64_t>(cfg.random_seed));
    for (const auto& r : corpus.records) w.instances.push_back(Instance{d, r});
    w.corpora.push_back(std::move(corpus));
  }
  return w;
}

PruneReason breach_reason(const TrialRecord& r, std::uint64_t limit) {
  const std::uint64_t peak = r.telemetry && r.telemetry->max_vram_bytes ? *r.telemetry->max_vram_bytes : 0;
  return PruneReason{"max_vram_bytes", static_cast<double>(peak), static_cast<double>(limit)};
}

std::vector<std::optional<double>> matrix_row(const TrialRecord& r) {
  std::vector<std::optional<double>> row;
  for (const char* m : kQualityMetrics) row.push_back(r.metrics.get(m));
  row.push_back(r.latency.retrieval_latency_s);
  row.push_back(r.latency.generation_latency_s);
  row.push_back(r.telemetry ? r.telemetry->mean_vram_bytes : std::nullopt);
  row.push_back(r.tokens_per_second);
  return row;
}

class Session {
 public:
  Session(const ExperimentConfig& cfg, const OrchestratorOptions& opts)
      : cfg_(cfg), opts_(opts), session_id_(config_fingerprint(cfg)),
        paths_(session_paths(resolve(opts.base_dir, cfg.output_dir), session_id_)),
        history_store_(paths_.root) {
    if (opts_.probe == nullptr) {
      own_probe_ = std::make_unique<SystemProbe>();
      probe_ = own_probe_.get();
    } else {
      probe_ = opts_.probe;
    }
    state_.session_id = session_id_;
  }

  const SessionPaths& paths() const { return paths_; }

  SessionState run();
  SessionEstimate estimate(std::optional<double> per_line);

 private:
  struct Plan {
    std::vector<CombinationSpec> combos;
    std::vector<PruneDecision> decisions;
  };

  Plan plan(const HistoryStats& history) const {
    Plan p;
    p.combos = enumerate_combinations(cfg_.grid);
    for (const auto& c : p.combos) p.decisions.push_back(should_skip(c, history, cfg_.thresholds));
    return p;
  }

  void publish() {
    ++state_.revision;
    if (opts_.on_progress) opts_.on_progress(std::make_shared<const SessionState>(state_));
  }

  void save_state() { write_file_atomic(paths_.state, to_json(state_).dump(2) + "\n"); }

  void set_phase(SessionPhase phase) {
    state_.phase = phase;
    publish();
  }

  EmbeddingProvider& embedder(const std::string& id) {
    auto& slot = embedders_[id];
    if (!slot) slot = make_embedding_provider(id, cfg_.provider_endpoints, cfg_.runtime);
    return *slot;
  }

  LLMProvider& llm(const std::string& id) {
    auto& slot = llms_[id];
    if (!slot) slot = make_llm_provider(id, cfg_.provider_endpoints, cfg_.runtime, opts_.base_dir);
    return *slot;
  }

  JudgeProvider& judge() {
    if (!judge_) judge_ = make_judge(cfg_.provider_endpoints, cfg_.runtime, opts_.base_dir);
    return *judge_;
  }

  RerankerProvider& reranker() {
    if (!reranker_) reranker_ = make_reranker(cfg_.provider_endpoints, cfg_.runtime);
    return *reranker_;
  }

  /// Answer relevancy uses one embedder for every combination so scores compare.
  EmbeddingProvider& evaluation_embedder() {
    if (!eval_embedder_) {
      auto it = cfg_.provider_endpoints.find("evaluation_embedder");
      const std::string id = it == cfg_.provider_endpoints.end() ? "reference:256" : it->second;
      eval_embedder_ = make_embedding_provider(id, cfg_.provider_endpoints, cfg_.runtime);
    }
    return *eval_embedder_;
  }

  ChunkStore& store_for(const CombinationSpec& c, std::size_t dataset) {
    const std::string key = std::to_string(dataset) + "|" + std::to_string(c.chunk_size) + "|" +
                            std::to_string(c.chunk_overlap) + "|" + c.embedder + "|" +
                            std::string(to_string(c.storage_kind));
    auto& slot = stores_[key];
    if (slot) return *slot;
    ChunkingParams params;
    params.chunk_size = c.chunk_size;
    params.chunk_overlap = c.chunk_overlap;
    std::vector<Chunk> chunks;
    std::set<std::string> seen_contexts;
    std::set<std::string> seen_ids;
    for (const auto& r : workload_.corpora[dataset].records) {
      if (!seen_contexts.insert(r.context).second) continue;
      std::string sid = r.source_id;
      for (int n = 2; !seen_ids.insert(sid).second; ++n) sid = r.source_id + "#" + std::to_string(n);
      for (auto& ch : split_document(r.context, params, sid)) chunks.push_back(std::move(ch));
    }
    const fs::path path = paths_.index_dir / (hex64(fnv1a64(key)) + ".rbvs");
    slot = std::make_unique<ChunkStore>(build_chunk_store(c.storage_kind, path, embedder(c.embedder), chunks));
    return *slot;
  }

  TrialRecord run_trial(const CombinationSpec& c, std::size_t k, LineAppender* telemetry_log);

  const ExperimentConfig& cfg_;
  OrchestratorOptions opts_;
  std::string session_id_;
  SessionPaths paths_;
  HistoryStore history_store_;
  std::unique_ptr<ResourceProbe> own_probe_;
  ResourceProbe* probe_ = nullptr;
  SessionState state_;
  Workload workload_;
  double t0_ = monotonic_seconds();
  std::map<std::string, std::unique_ptr<EmbeddingProvider>> embedders_;
  std::map<std::string, std::unique_ptr<LLMProvider>> llms_;
  std::unique_ptr<JudgeProvider> judge_;
  std::unique_ptr<RerankerProvider> reranker_;
  std::unique_ptr<EmbeddingProvider> eval_embedder_;
  std::map<std::string, std::unique_ptr<ChunkStore>> stores_;
};

TrialRecord Session::run_trial(const CombinationSpec& c, std::size_t k, LineAppender* telemetry_log) {
  const Instance& inst = workload_.instances.at(k);
  TrialRecord rec;
  rec.session_id = session_id_;
  rec.combination_id = c.id;
  rec.combination_ordinal = c.ordinal;
  rec.instance = k;
  rec.dataset = workload_.corpora[inst.dataset].name;
  rec.source_id = inst.record.source_id;
  rec.question = inst.record.question;
  rec.expected_answer = inst.record.answer;
  rec.started_at = utc_now();

  ChunkStore& store = store_for(c, inst.dataset);

  std::vector<TelemetrySample> samples;
  std::mutex samples_mutex;
  std::atomic<bool> breached{false};
  std::atomic<std::uint64_t> breach_value{0};
  const auto limit = cfg_.thresholds.max_vram_bytes;
  probe_->begin_trial(TrialTag{c.id, c.ordinal, k});
  const double trial_start = monotonic_seconds();
  auto sampler = run_sampler(*probe_, cfg_.runtime.sampling_period_ms, [&](const TelemetrySample& s) {
    {
      std::lock_guard lock(samples_mutex);
      samples.push_back(s);
    }
    if (check_vram_interrupt(s.vram_bytes_used, limit) && !breached.exchange(true)) {
      breach_value = *s.vram_bytes_used;
    }
    if (telemetry_log != nullptr) {
      json line{{"session_id", session_id_}, {"combination_id", c.id}, {"instance", k}, {"sample", to_json(s)}};
      line["sample"]["t"] = s.timestamp_monotonic_s - t0_;
      telemetry_log->write(line.dump());
    }
  });

  auto finish_telemetry = [&] {
    sampler->stop();
    std::lock_guard lock(samples_mutex);
    rec.telemetry = summarize_samples(samples);
  };
  auto interrupted = [&] {
    if (!breached) return false;
    rec.status = TrialStatus::interrupted;
    rec.breach = "max_vram_bytes: observed " + std::to_string(breach_value.load()) + " > limit " +
                 std::to_string(*limit);
    return true;
  };

  RetrievedContext context;
  try {
    if (interrupted()) {
      finish_telemetry();
      return rec;
    }
    RetrievalSpec spec{c.search_type, c.distance_metric, c.top_k, c.rerank, cfg_.runtime.candidate_multiplier};
    context = retrieve(store, embedder(c.embedder), c.rerank ? &reranker() : nullptr, rec.question, spec);
    rec.latency.retrieval_latency_s = context.retrieval_latency_s;
    for (const auto& w : context.warnings) rec.warnings.push_back(w);
    for (const auto& item : context.items) {
      rec.retrieved.push_back(RetrievedRef{item.chunk_id, item.score, std::string(to_string(item.provenance))});
    }
    if (interrupted()) {
      finish_telemetry();
      return rec;
    }
    const std::string prompt = build_prompt(rec.question, context);
    DecodeParams decode{cfg_.runtime.temperature, cfg_.runtime.decode_top_k,
                        static_cast<std::uint64_t>(cfg_.random_seed)};
    rec.generation_started_s = monotonic_seconds() - t0_;
    const GenerationRecord gen = generate(llm(c.llm), prompt, decode);
    rec.generation_finished_s = monotonic_seconds() - t0_;
    rec.answer = gen.answer_text;
    rec.tokens_generated = gen.tokens_generated;
    rec.tokens_per_second = gen.tokens_per_second;
    rec.latency.generation_latency_s = gen.generation_latency_s;
  } catch (const std::exception& e) {
    rec.status = TrialStatus::failed;
    rec.warnings.push_back(std::string("trial failed: ") + e.what());
  }
  rec.latency.total_latency_s = monotonic_seconds() - trial_start;
  rec.latency.overhead_s = std::max(
      0.0, rec.latency.total_latency_s - rec.latency.retrieval_latency_s - rec.latency.generation_latency_s);
  finish_telemetry();
  if (rec.status == TrialStatus::ok && interrupted()) return rec;
  if (rec.status != TrialStatus::ok) return rec;

  EvaluationInput input;
  input.trial_id = c.id + ":" + std::to_string(k);
  input.question = rec.question;
  input.answer = rec.answer;
  input.expected_output = rec.expected_answer;
  for (const auto& item : context.items) input.contexts.push_back(item.chunk.text);
  try {
    Evaluation ev = evaluate_trial(input, judge(), evaluation_embedder(), cfg_.runtime.potential_questions,
                                   cfg_.runtime.answer_relevancy_operands);
    rec.metrics = ev.scores;
    for (auto& w : ev.warnings) rec.warnings.push_back(std::move(w));
  } catch (const std::exception& e) {
    rec.warnings.push_back(std::string("evaluation failed: ") + e.what());
  }
  return rec;
}

SessionState Session::run() {
  state_.started_at = utc_now();
  state_.phase = SessionPhase::planning;
  try {
    fs::create_directories(paths_.session_dir);
    write_file_atomic(paths_.config_snapshot, serialize_config(cfg_));
    workload_ = load_workload(cfg_, opts_.base_dir);
    for (const auto& w : probe_->warnings()) state_.warnings.push_back(w);
    if (cfg_.thresholds.max_vram_bytes && !probe_->vram_observable()) {
      state_.warnings.push_back("max_vram_bytes is not enforceable: VRAM is not observable");
    }

    const HistoryStats history = history_store_.load();
    const Plan p = plan(history);
    auto prior = last_per_pair(read_trial_log(paths_.trials), session_id_);
    const std::size_t n = workload_.instances.size();

    std::vector<std::size_t> runnable;
    for (std::size_t j = 0; j < p.combos.size(); ++j) {
      const auto& c = p.combos[j];
      state_.planned.push_back(c.id);
      CombinationProgress prog{c.id, c.ordinal, "pending", 0, n, {}};
      bool fully_logged = true;
      std::optional<PruneReason> was_interrupted;
      for (std::size_t k = 0; k < n; ++k) {
        auto it = prior.find({c.id, k});
        if (it == prior.end() || it->second.status == TrialStatus::failed) {
          fully_logged = false;
        } else {
          ++prog.done;
          if (it->second.status == TrialStatus::interrupted && cfg_.thresholds.max_vram_bytes) {
            was_interrupted = breach_reason(it->second, *cfg_.thresholds.max_vram_bytes);
          }
        }
      }
      if (was_interrupted) {
        prog.status = "skipped";
        state_.skipped.push_back(SkippedCombination{c.id, c.ordinal, "in_run", {*was_interrupted}});
      } else if (fully_logged) {
        prog.status = "completed";
        state_.completed.push_back(c.id);
        state_.trials_resumed += n;
      } else if (p.decisions[j].skip()) {
        prog.status = "skipped";
        state_.skipped.push_back(SkippedCombination{c.id, c.ordinal, "planning", p.decisions[j].reasons});
      } else {
        state_.pending.push_back(c.id);
        runnable.push_back(j);
      }
      state_.progress.push_back(std::move(prog));
    }
    publish();

    LineAppender trial_log(paths_.trials, true);
    LineAppender telemetry_log(paths_.telemetry, false);

    for (std::size_t j : runnable) {
      const auto& c = p.combos[j];
      auto& prog = state_.progress[j];
      if (opts_.cancel && opts_.cancel->load()) throw Error("session cancelled");
      prog.status = "running";
      set_phase(SessionPhase::indexing);
      bool any_ok = false;
      bool interrupted = false;
      PruneReason breach;
      std::map<std::string, std::pair<double, std::size_t>> means;
      try {
        for (std::size_t d = 0; d < workload_.corpora.size(); ++d) store_for(c, d);
      } catch (const std::exception& e) {
        state_.warnings.push_back("combination " + c.id + ": index build failed: " + e.what());
        prog.status = "failed";
        std::erase(state_.pending, c.id);
        state_.failed.push_back(c.id);
        publish();
        continue;
      }
      set_phase(SessionPhase::running);
      for (std::size_t k = 0; k < n && !interrupted; ++k) {
        auto it = prior.find({c.id, k});
        if (it != prior.end() && it->second.status == TrialStatus::ok) {
          any_ok = true;
          ++state_.trials_resumed;
          continue;
        }
        if (opts_.cancel && opts_.cancel->load()) throw Error("session cancelled");
        TrialRecord rec = run_trial(c, k, &telemetry_log);
        trial_log.write(to_json_line(rec));
        const HistoryEntry entry = history_entry(rec, c);
        history_store_.append(entry);
        ++state_.trials_executed;
        if (rec.status == TrialStatus::ok) {
          any_ok = true;
          for (const char* m : kQualityMetrics) {
            if (auto v = rec.metrics.get(m)) {
              auto& [sum, count] = means[m];
              sum += *v;
              ++count;
              prog.preview[m] = sum / static_cast<double>(count);
            }
          }
        }
        if (rec.status == TrialStatus::interrupted) {
          interrupted = true;
          breach = breach_reason(rec, *cfg_.thresholds.max_vram_bytes);
          state_.warnings.push_back("combination " + c.id + " interrupted: " + rec.breach.value_or(""));
        }
        ++prog.done;
        publish();
      }
      std::erase(state_.pending, c.id);
      if (interrupted) {
        prog.status = "skipped";
        state_.skipped.push_back(SkippedCombination{c.id, c.ordinal, "in_run", {breach}});
      } else if (any_ok) {
        prog.status = "completed";
        state_.completed.push_back(c.id);
      } else {
        prog.status = "failed";
        state_.failed.push_back(c.id);
      }
      save_state();
      publish();
    }
    history_store_.write_snapshot(history_store_.load());

    set_phase(SessionPhase::aggregating);
    auto finals = last_per_pair(read_trial_log(paths_.trials), session_id_);
    std::vector<std::string> metric_ids(std::begin(kMatrixMetrics), std::end(kMatrixMetrics));
    ScoreMatrix matrix(metric_ids, p.combos);
    for (const auto& [key, rec] : finals) {
      if (rec.status != TrialStatus::ok) continue;
      auto pos = std::find_if(p.combos.begin(), p.combos.end(),
                              [&](const CombinationSpec& c) { return c.id == key.first; });
      if (pos == p.combos.end()) continue;
      matrix.add_instance(static_cast<std::size_t>(pos - p.combos.begin()), matrix_row(rec));
    }
    try {
      const auto report = recommend(matrix, describe_metrics(cfg_.weights, cfg_.runtime), &cfg_);
      state_.best_combination_id = report.best_spec.id;
      write_file_atomic(paths_.recommendation, to_json(report, matrix, session_id_).dump(2) + "\n");
      write_file_atomic(paths_.best_config, serialize_config(*report.emitted_config));
    } catch (const RecommendationError& e) {
      state_.warnings.push_back(std::string("no recommendation: ") + e.what());
    }
    state_.phase = SessionPhase::done;
  } catch (const std::exception& e) {
    state_.phase = SessionPhase::aborted;
    state_.error = e.what();
  }
  state_.finished_at = utc_now();
  try {
    save_state();
  } catch (const std::exception& e) {
    if (!state_.error) state_.error = e.what();
    state_.phase = SessionPhase::aborted;
  }
  publish();
  return state_;
}

SessionEstimate Session::estimate(std::optional<double> per_line) {
  SessionEstimate est;
  workload_ = load_workload(cfg_, opts_.base_dir);
  est.instances = workload_.instances.size();
  const HistoryStats history = history_store_.load();
  const Plan p = plan(history);
  std::optional<std::size_t> first;
  for (std::size_t j = 0; j < p.combos.size(); ++j) {
    if (p.decisions[j].skip()) {
      ++est.skipped;
    } else {
      ++est.combinations;
      if (!first) first = j;
    }
  }
  if (per_line) {
    est.source = "given";
    est.per_line_seconds = *per_line;
  } else if (auto h = historical_seconds_per_line(history)) {
    est.source = "history";
    est.per_line_seconds = *h;
  } else if (first) {
    est.source = "calibration";
    const auto& c = p.combos[*first];
    for (int pass = 0; pass < 2; ++pass) {
      const TrialRecord r = run_trial(c, 0, nullptr);
      if (r.status == TrialStatus::failed) {
        throw Error("calibration trial failed: " + (r.warnings.empty() ? std::string() : r.warnings.back()));
      }
      est.per_line_seconds = r.latency.total_latency_s;
    }
  }
  if (est.combinations == 0 || est.instances == 0) return est;
  est.per_line_seconds = std::max(est.per_line_seconds, 1e-9);
  est.seconds = estimate_cost(est.per_line_seconds, static_cast<long long>(est.instances),
                              static_cast<long long>(est.combinations));
  return est;
}

}  // namespace

SessionState run_session(const ExperimentConfig& config, const OrchestratorOptions& options) {
  Session s(config, options);
  return s.run();
}

SessionEstimate estimate_session(const ExperimentConfig& config, const OrchestratorOptions& options,
                                 std::optional<double> per_line_seconds) {
  Session s(config, options);
  return s.estimate(per_line_seconds);
}

std::size_t count_instances(const ExperimentConfig& config, const fs::path& base_dir) {
  return load_workload(config, base_dir).instances.size();
}

std::vector<TrialRecord> load_session_records(const fs::path& output_dir, const std::string& session_id) {
  const auto paths = session_paths(output_dir, session_id);
  if (!fs::exists(paths.session_dir)) throw NotFoundError("unknown session " + session_id);
  auto finals = last_per_pair(read_trial_log(paths.trials), session_id);
  std::vector<TrialRecord> out;
  for (auto& [key, rec] : finals) out.push_back(std::move(rec));
  std::stable_sort(out.begin(), out.end(), [](const TrialRecord& a, const TrialRecord& b) {
    if (a.combination_ordinal != b.combination_ordinal) return a.combination_ordinal < b.combination_ordinal;
    return a.instance < b.instance;
  });
  return out;
}

std::size_t export_results(const fs::path& output_dir, const std::string& session_id, std::ostream& sink) {
  const auto records = load_session_records(output_dir, session_id);
  for (const auto& r : records) sink << to_json_line(r) << '\n';
  return records.size();
}

json export_summary(const fs::path& output_dir, const std::string& session_id) {
  const auto paths = session_paths(output_dir, session_id);
  if (!fs::exists(paths.session_dir)) throw NotFoundError("unknown session " + session_id);
  auto read = [](const fs::path& p) -> json {
    std::ifstream in(p);
    if (!in) return nullptr;
    return json::parse(in, nullptr, false);
  };
  return json{{"state", read(paths.state)}, {"recommendation", read(paths.recommendation)}};
}

}  // namespace ragebench
