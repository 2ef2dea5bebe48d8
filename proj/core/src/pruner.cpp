#include "ragebench/pruner.hpp"

#include <unistd.h>

#include <cstdio>
#include <fstream>

#include "ragebench/errors.hpp"

namespace ragebench {

using nlohmann::json;

GenerationKey generation_key(const CombinationSpec& c) { return GenerationKey{c.llm, c.embedder}; }

RetrievalKey retrieval_key(const CombinationSpec& c) {
  return RetrievalKey{c.embedder, c.storage_kind, c.search_type, c.distance_metric, c.chunk_size, c.top_k};
}

HistoryEntry history_entry(const TrialRecord& record, const CombinationSpec& combination) {
  HistoryEntry e;
  e.session_id = record.session_id;
  e.combination = combination;
  e.instance = record.instance;
  e.status = record.status;
  e.generation_latency_s = record.latency.generation_latency_s;
  e.retrieval_latency_s = record.latency.retrieval_latency_s;
  e.total_latency_s = record.latency.total_latency_s;
  if (record.telemetry) e.max_vram_bytes = record.telemetry->max_vram_bytes;
  return e;
}

json to_json(const HistoryEntry& e) {
  return json{{"schema", kHistorySchema},
              {"session_id", e.session_id},
              {"combination_id", e.combination.id},
              {"combination", e.combination.to_json()},
              {"instance", e.instance},
              {"status", to_string(e.status)},
              {"generation_latency_s", e.generation_latency_s},
              {"retrieval_latency_s", e.retrieval_latency_s},
              {"total_latency_s", e.total_latency_s},
              {"max_vram_bytes", e.max_vram_bytes ? json(*e.max_vram_bytes) : json(nullptr)}};
}

HistoryEntry history_entry_from_json(const json& j) {
  try {
    if (j.at("schema").get<std::string>() != kHistorySchema) {
      throw ValidationError("schema", "unsupported history schema");
    }
    HistoryEntry e;
    e.session_id = j.at("session_id").get<std::string>();
    e.combination = combination_from_json(j.at("combination"));
    e.instance = j.at("instance").get<std::size_t>();
    auto status = parse_trial_status(j.at("status").get<std::string>());
    if (!status) throw ValidationError("status", "unknown trial status");
    e.status = *status;
    e.generation_latency_s = j.at("generation_latency_s").get<double>();
    e.retrieval_latency_s = j.at("retrieval_latency_s").get<double>();
    e.total_latency_s = j.at("total_latency_s").get<double>();
    if (!j.at("max_vram_bytes").is_null()) e.max_vram_bytes = j["max_vram_bytes"].get<std::uint64_t>();
    return e;
  } catch (const json::exception& ex) {
    throw ValidationError("history", ex.what());
  }
}

namespace {

void observe(KeyStats& s, double value) {
  if (!s.warmed_up) {
    s.warmed_up = true;
    return;
  }
  ++s.count;
  s.sum += value;
}

}  // namespace

HistoryStats update_history(HistoryStats history, std::span<const HistoryEntry> entries) {
  for (const auto& e : entries) {
    if (e.max_vram_bytes) {
      auto& slot = history.max_vram[e.combination.id];
      slot = std::max(slot, *e.max_vram_bytes);
    }
    if (e.status != TrialStatus::ok) continue;
    observe(history.generation[generation_key(e.combination)], e.generation_latency_s);
    observe(history.retrieval[retrieval_key(e.combination)], e.retrieval_latency_s);
    observe(history.combination_total[e.combination.id], e.total_latency_s);
  }
  return history;
}

std::optional<double> historical_seconds_per_line(const HistoryStats& stats) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& [id, s] : stats.combination_total) {
    sum += s.sum;
    count += s.count;
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

json to_json(const PruneReason& r) {
  return json{{"threshold", r.threshold}, {"value", r.value}, {"limit", r.limit}};
}

PruneDecision should_skip(const CombinationSpec& combination, const HistoryStats& history,
                          const ThresholdSet& thresholds) {
  PruneDecision d;
  auto mean_of = [](const auto& map, const auto& key) -> std::optional<double> {
    auto it = map.find(key);
    return it == map.end() ? std::nullopt : it->second.mean();
  };
  const auto gen = mean_of(history.generation, generation_key(combination));
  const auto ret = mean_of(history.retrieval, retrieval_key(combination));
  auto check = [&](const char* name, const std::optional<double>& value, const std::optional<double>& limit) {
    if (value && limit && *value > *limit) d.reasons.push_back(PruneReason{name, *value, *limit});
  };
  check("max_generation_latency_s", gen, thresholds.max_generation_latency_s);
  check("max_retrieval_latency_s", ret, thresholds.max_retrieval_latency_s);
  if (gen && ret) check("max_total_latency_s", *gen + *ret, thresholds.max_total_latency_s);
  if (thresholds.max_vram_bytes) {
    auto it = history.max_vram.find(combination.id);
    if (it != history.max_vram.end() && it->second > *thresholds.max_vram_bytes) {
      d.reasons.push_back(PruneReason{"max_vram_bytes", static_cast<double>(it->second),
                                      static_cast<double>(*thresholds.max_vram_bytes)});
    }
  }
  if (!d.reasons.empty()) d.action = PruneDecision::Action::skip;
  return d;
}

bool check_vram_interrupt(std::optional<std::uint64_t> sample_vram, std::optional<std::uint64_t> max_vram) {
  return sample_vram && max_vram && *sample_vram > *max_vram;
}

// --- persistence -------------------------------------------------------------

HistoryStore::HistoryStore(std::filesystem::path dir)
    : log_path_(dir / "history.jsonl"), snapshot_path_(dir / "history.snapshot.json") {}

std::vector<HistoryEntry> HistoryStore::load_entries() const {
  std::vector<HistoryEntry> out;
  std::ifstream in(log_path_);
  if (!in) return out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      if (in.peek() == std::char_traits<char>::eof()) break;  // torn final append
      throw ParseError(log_path_.string() + ": malformed line " + std::to_string(lineno), 0);
    }
    out.push_back(history_entry_from_json(j));
  }
  return out;
}

HistoryStats HistoryStore::load() const {
  const auto entries = load_entries();
  return update_history({}, entries);
}

void HistoryStore::append(const HistoryEntry& entry) {
  std::filesystem::create_directories(log_path_.parent_path());
  const std::string line = to_json(entry).dump() + "\n";
  std::FILE* f = std::fopen(log_path_.c_str(), "ab");
  if (f == nullptr) throw Error("cannot open " + log_path_.string());
  const bool ok = std::fwrite(line.data(), 1, line.size(), f) == line.size() && std::fflush(f) == 0 &&
                  ::fsync(fileno(f)) == 0;
  std::fclose(f);
  if (!ok) throw Error("cannot append to " + log_path_.string());
}

json snapshot_to_json(const HistoryStats& stats) {
  auto mean = [](const KeyStats& s) { return s.mean() ? json(*s.mean()) : json(nullptr); };
  json gen = json::array(), ret = json::array(), total = json::array(), vram = json::array();
  for (const auto& [k, s] : stats.generation) {
    gen.push_back({{"llm", k.llm_id}, {"embedder", k.embedder_id}, {"count", s.count}, {"mean_s", mean(s)}});
  }
  for (const auto& [k, s] : stats.retrieval) {
    ret.push_back({{"embedder", k.embedder_id},
                   {"storage_kind", to_string(k.storage_kind)},
                   {"search_type", to_string(k.search_type)},
                   {"distance_metric", to_string(k.distance_metric)},
                   {"chunk_size", k.chunk_size},
                   {"top_k", k.top_k},
                   {"count", s.count},
                   {"mean_s", mean(s)}});
  }
  for (const auto& [id, s] : stats.combination_total) {
    total.push_back({{"combination_id", id}, {"count", s.count}, {"mean_s", mean(s)}});
  }
  for (const auto& [id, v] : stats.max_vram) vram.push_back({{"combination_id", id}, {"max_vram_bytes", v}});
  return json{{"schema", kHistorySnapshotSchema},
              {"generation", std::move(gen)},
              {"retrieval", std::move(ret)},
              {"combination_total", std::move(total)},
              {"max_vram", std::move(vram)}};
}

void HistoryStore::write_snapshot(const HistoryStats& stats) const {
  std::filesystem::create_directories(snapshot_path_.parent_path());
  auto tmp = snapshot_path_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << snapshot_to_json(stats).dump(2) << "\n";
    if (!out) throw Error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, snapshot_path_);
}

}  // namespace ragebench
