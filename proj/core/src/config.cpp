#include "ragebench/config.hpp"

#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "ragebench/errors.hpp"
#include "ragebench/text.hpp"

namespace ragebench {

using nlohmann::json;

namespace {

constexpr std::array<MetricInfo, 9> kCatalog{{
    {"hallucination", MetricCategory::generation, Direction::high_is_better},
    {"faithfulness", MetricCategory::generation, Direction::high_is_better},
    {"answer_relevancy", MetricCategory::generation, Direction::high_is_better},
    {"context_precision", MetricCategory::retrieval, Direction::high_is_better},
    {"context_recall", MetricCategory::retrieval, Direction::high_is_better},
    {"retrieval_latency", MetricCategory::hardware, Direction::low_is_better},
    {"generation_latency", MetricCategory::hardware, Direction::low_is_better},
    {"mean_vram", MetricCategory::hardware, Direction::low_is_better},
    {"tokens_per_second", MetricCategory::hardware, Direction::high_is_better},
}};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view s,
                           const std::array<std::pair<std::string_view, Enum>, N>& table) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

constexpr std::array<std::pair<std::string_view, StorageKind>, 2> kStorage{{
    {"memory_library", StorageKind::memory_library},
    {"persistent_store", StorageKind::persistent_store},
}};
constexpr std::array<std::pair<std::string_view, SearchType>, 2> kSearch{{
    {"similarity", SearchType::similarity},
    {"hybrid", SearchType::hybrid},
}};
constexpr std::array<std::pair<std::string_view, DistanceMetric>, 3> kMetric{{
    {"cosine", DistanceMetric::cosine},
    {"euclidean", DistanceMetric::euclidean},
    {"inner_product", DistanceMetric::inner_product},
}};
constexpr std::array<std::pair<std::string_view, DatasetFormat>, 2> kFormat{{
    {"json", DatasetFormat::json},
    {"csv", DatasetFormat::csv},
}};
constexpr std::array<std::pair<std::string_view, WeightLevel>, 5> kLevel{{
    {"NoRelevance", WeightLevel::no_relevance},
    {"No Relevance", WeightLevel::no_relevance},
    {"Low", WeightLevel::low},
    {"Medium", WeightLevel::medium},
    {"High", WeightLevel::high},
}};
constexpr std::array<std::pair<std::string_view, Direction>, 2> kDirection{{
    {"high_is_better", Direction::high_is_better},
    {"low_is_better", Direction::low_is_better},
}};

std::string join_path(const std::string& parent, std::string_view child) {
  return parent.empty() ? std::string(child) : parent + "." + std::string(child);
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || a == key;
    if (!known) throw ValidationError(join_path(path, key), "unknown key");
  }
}

const json& require_object(const json& v, const std::string& path) {
  if (!v.is_object()) throw ValidationError(path, "expected an object");
  return v;
}

std::string read_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ValidationError(path, "expected a string");
  return v.get<std::string>();
}

long long read_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ValidationError(path, "expected an integer");
  return v.get<long long>();
}

double read_positive_real(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path, "expected a number");
  double d = v.get<double>();
  if (!(d > 0.0)) throw ValidationError(path, "must be positive");
  return d;
}

const json& read_axis(const json& grid, std::string_view axis) {
  const std::string path = join_path("grid", axis);
  const json& v = grid.at(std::string(axis));
  if (!v.is_array()) throw ValidationError(path, "expected an array");
  if (v.empty()) throw ValidationError(path, "axis must not be empty");
  return v;
}

template <typename Enum, std::size_t N>
std::vector<Enum> read_enum_axis(const json& grid, std::string_view axis,
                                 const std::array<std::pair<std::string_view, Enum>, N>& table) {
  std::vector<Enum> out;
  const json& arr = read_axis(grid, axis);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = join_path("grid", axis) + "[" + std::to_string(i) + "]";
    auto value = lookup(read_string(arr[i], path), table);
    if (!value) throw ValidationError(path, "unknown value '" + arr[i].get<std::string>() + "'");
    out.push_back(*value);
  }
  return out;
}

std::vector<int> read_int_axis(const json& grid, std::string_view axis, int min_value) {
  std::vector<int> out;
  const json& arr = read_axis(grid, axis);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = join_path("grid", axis) + "[" + std::to_string(i) + "]";
    long long v = read_int(arr[i], path);
    if (v < min_value || v > 1'000'000'000) {
      throw ValidationError(path, min_value > 0 ? "must be a positive integer"
                                                : "must be a non-negative integer");
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<std::string> read_string_axis(const json& grid, std::string_view axis) {
  std::vector<std::string> out;
  const json& arr = read_axis(grid, axis);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = join_path("grid", axis) + "[" + std::to_string(i) + "]";
    std::string s = read_string(arr[i], path);
    if (s.empty()) throw ValidationError(path, "must not be empty");
    out.push_back(std::move(s));
  }
  return out;
}

GridAxes read_grid(const json& doc) {
  const json& g = require_object(doc, "grid");
  reject_unknown_keys(g, "grid",
                      {"llms", "embedders", "storage_kinds", "search_types", "distance_metrics",
                       "rerank", "chunk_sizes", "chunk_overlaps", "top_k"});
  json grid = g;
  // Documented defaults for every axis except the two model lists.
  for (const char* required : {"llms", "embedders"}) {
    if (!grid.contains(required)) throw ValidationError(join_path("grid", required), "required");
  }
  if (!grid.contains("storage_kinds")) grid["storage_kinds"] = {"memory_library"};
  if (!grid.contains("search_types")) grid["search_types"] = {"similarity"};
  if (!grid.contains("distance_metrics")) grid["distance_metrics"] = {"cosine"};
  if (!grid.contains("rerank")) grid["rerank"] = {false};
  if (!grid.contains("chunk_sizes")) grid["chunk_sizes"] = {512};
  if (!grid.contains("chunk_overlaps")) grid["chunk_overlaps"] = {64};
  if (!grid.contains("top_k")) grid["top_k"] = {4};

  GridAxes axes;
  axes.llms = read_string_axis(grid, "llms");
  axes.embedders = read_string_axis(grid, "embedders");
  axes.storage_kinds = read_enum_axis(grid, "storage_kinds", kStorage);
  axes.search_types = read_enum_axis(grid, "search_types", kSearch);
  axes.distance_metrics = read_enum_axis(grid, "distance_metrics", kMetric);
  const json& rerank = read_axis(grid, "rerank");
  for (std::size_t i = 0; i < rerank.size(); ++i) {
    if (!rerank[i].is_boolean()) {
      throw ValidationError("grid.rerank[" + std::to_string(i) + "]", "expected a boolean");
    }
    axes.rerank.push_back(rerank[i].get<bool>());
  }
  axes.chunk_sizes = read_int_axis(grid, "chunk_sizes", 1);
  axes.chunk_overlaps = read_int_axis(grid, "chunk_overlaps", 0);
  axes.top_k = read_int_axis(grid, "top_k", 1);
  return axes;
}

ThresholdSet read_thresholds(const json& doc) {
  const json& t = require_object(doc, "thresholds");
  reject_unknown_keys(t, "thresholds",
                      {"max_total_latency_s", "max_generation_latency_s",
                       "max_retrieval_latency_s", "max_vram_bytes"});
  ThresholdSet out;
  auto real = [&](const char* key, std::optional<double>& slot) {
    if (t.contains(key) && !t.at(key).is_null()) {
      slot = read_positive_real(t.at(key), join_path("thresholds", key));
    }
  };
  real("max_total_latency_s", out.max_total_latency_s);
  real("max_generation_latency_s", out.max_generation_latency_s);
  real("max_retrieval_latency_s", out.max_retrieval_latency_s);
  if (t.contains("max_vram_bytes") && !t.at("max_vram_bytes").is_null()) {
    const std::string path = "thresholds.max_vram_bytes";
    long long v = read_int(t.at("max_vram_bytes"), path);
    if (v <= 0) throw ValidationError(path, "must be positive");
    out.max_vram_bytes = static_cast<std::uint64_t>(v);
  }
  return out;
}

WeightLevel read_level(const json& v, const std::string& path) {
  auto level = parse_weight_level(read_string(v, path));
  if (!level) throw ValidationError(path, "expected one of NoRelevance, Low, Medium, High");
  return *level;
}

MetricWeights read_weights(const json& doc) {
  const json& w = require_object(doc, "weights");
  reject_unknown_keys(w, "weights", {"generation", "retrieval", "hardware"});
  MetricWeights out = MetricWeights::all(WeightLevel::medium);
  for (const auto& [category_name, body] : w.items()) {
    const std::string path = join_path("weights", category_name);
    if (body.is_string()) {
      // Category shorthand: one level for every metric in the category.
      const WeightLevel level = read_level(body, path);
      for (const auto& m : metric_catalog()) {
        if (to_string(m.category) == category_name) out.levels[std::string(m.id)] = level;
      }
      continue;
    }
    require_object(body, path);
    for (const auto& [metric, level] : body.items()) {
      const MetricInfo* info = find_metric(metric);
      if (info == nullptr || to_string(info->category) != category_name) {
        throw ValidationError(join_path(path, metric), "unknown metric for this category");
      }
      out.levels[metric] = read_level(level, join_path(path, metric));
    }
  }
  return out;
}

RuntimeOptions read_runtime(const json& doc) {
  const json& r = require_object(doc, "runtime");
  reject_unknown_keys(r, "runtime",
                      {"sampling_period_ms", "request_timeout_s", "retries", "candidate_multiplier",
                       "potential_questions", "answer_relevancy_operands",
                       "hallucination_direction", "temperature", "decode_top_k", "max_in_flight"});
  RuntimeOptions out;
  auto bounded_int = [&](const char* key, int& slot, long long lo) {
    if (!r.contains(key)) return;
    const std::string path = join_path("runtime", key);
    long long v = read_int(r.at(key), path);
    if (v < lo || v > 1'000'000) {
      throw ValidationError(path, "must be an integer >= " + std::to_string(lo));
    }
    slot = static_cast<int>(v);
  };
  bounded_int("sampling_period_ms", out.sampling_period_ms, 10);
  bounded_int("retries", out.retries, 0);
  bounded_int("candidate_multiplier", out.candidate_multiplier, 1);
  bounded_int("potential_questions", out.potential_questions, 1);
  bounded_int("decode_top_k", out.decode_top_k, 1);
  bounded_int("max_in_flight", out.max_in_flight, 1);
  if (r.contains("request_timeout_s")) {
    out.request_timeout_s = read_positive_real(r.at("request_timeout_s"), "runtime.request_timeout_s");
  }
  if (r.contains("temperature")) {
    const json& t = r.at("temperature");
    if (!t.is_number() || t.get<double>() < 0.0) {
      throw ValidationError("runtime.temperature", "must be a non-negative number");
    }
    out.temperature = t.get<double>();
  }
  if (r.contains("answer_relevancy_operands")) {
    const std::string path = "runtime.answer_relevancy_operands";
    const std::string s = read_string(r.at("answer_relevancy_operands"), path);
    if (s == "question") {
      out.answer_relevancy_operands = RelevancyOperands::question;
    } else if (s == "answer") {
      out.answer_relevancy_operands = RelevancyOperands::answer;
    } else {
      throw ValidationError(path, "expected 'question' or 'answer'");
    }
  }
  if (r.contains("hallucination_direction")) {
    const std::string path = "runtime.hallucination_direction";
    auto d = parse_direction(read_string(r.at("hallucination_direction"), path));
    if (!d) throw ValidationError(path, "expected 'high_is_better' or 'low_is_better'");
    out.hallucination_direction = *d;
  }
  return out;
}

std::vector<DatasetRef> read_datasets(const json& doc) {
  if (!doc.is_array()) throw ValidationError("datasets", "expected an array");
  if (doc.empty()) throw ValidationError("datasets", "at least one dataset is required");
  std::vector<DatasetRef> out;
  std::set<std::string> names;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string path = "datasets[" + std::to_string(i) + "]";
    const json& d = require_object(doc[i], path);
    reject_unknown_keys(d, path, {"name", "path", "format"});
    DatasetRef ref;
    if (!d.contains("path")) throw ValidationError(path + ".path", "required");
    ref.path = read_string(d.at("path"), path + ".path");
    if (ref.path.empty()) throw ValidationError(path + ".path", "must not be empty");
    ref.name = d.contains("name") ? read_string(d.at("name"), path + ".name")
                                  : std::filesystem::path(ref.path).stem().string();
    if (ref.name.empty()) throw ValidationError(path + ".name", "must not be empty");
    if (!names.insert(ref.name).second) {
      throw ValidationError(path + ".name", "duplicate dataset name '" + ref.name + "'");
    }
    if (d.contains("format")) {
      auto fmt = parse_dataset_format(read_string(d.at("format"), path + ".format"));
      if (!fmt) throw ValidationError(path + ".format", "expected 'json' or 'csv'");
      ref.format = *fmt;
    } else {
      ref.format = std::filesystem::path(ref.path).extension() == ".csv" ? DatasetFormat::csv
                                                                          : DatasetFormat::json;
    }
    out.push_back(std::move(ref));
  }
  return out;
}

}  // namespace

std::string_view to_string(StorageKind v) {
  return v == StorageKind::memory_library ? "memory_library" : "persistent_store";
}
std::string_view to_string(SearchType v) {
  return v == SearchType::similarity ? "similarity" : "hybrid";
}
std::string_view to_string(DistanceMetric v) {
  switch (v) {
    case DistanceMetric::cosine: return "cosine";
    case DistanceMetric::euclidean: return "euclidean";
    case DistanceMetric::inner_product: return "inner_product";
  }
  return "cosine";
}
std::string_view to_string(DatasetFormat v) { return v == DatasetFormat::json ? "json" : "csv"; }
std::string_view to_string(WeightLevel v) {
  switch (v) {
    case WeightLevel::no_relevance: return "NoRelevance";
    case WeightLevel::low: return "Low";
    case WeightLevel::medium: return "Medium";
    case WeightLevel::high: return "High";
  }
  return "Medium";
}
std::string_view to_string(MetricCategory v) {
  switch (v) {
    case MetricCategory::generation: return "generation";
    case MetricCategory::retrieval: return "retrieval";
    case MetricCategory::hardware: return "hardware";
  }
  return "generation";
}
std::string_view to_string(Direction v) {
  return v == Direction::high_is_better ? "high_is_better" : "low_is_better";
}

std::optional<StorageKind> parse_storage_kind(std::string_view s) { return lookup(s, kStorage); }
std::optional<SearchType> parse_search_type(std::string_view s) { return lookup(s, kSearch); }
std::optional<DistanceMetric> parse_distance_metric(std::string_view s) { return lookup(s, kMetric); }
std::optional<DatasetFormat> parse_dataset_format(std::string_view s) { return lookup(s, kFormat); }
std::optional<WeightLevel> parse_weight_level(std::string_view s) { return lookup(s, kLevel); }
std::optional<Direction> parse_direction(std::string_view s) { return lookup(s, kDirection); }

std::span<const MetricInfo> metric_catalog() { return kCatalog; }

const MetricInfo* find_metric(std::string_view id) {
  for (const auto& m : kCatalog) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

std::size_t GridAxes::cardinality() const noexcept {
  return llms.size() * embedders.size() * storage_kinds.size() * search_types.size() *
         distance_metrics.size() * rerank.size() * chunk_sizes.size() * chunk_overlaps.size() *
         top_k.size();
}

WeightLevel MetricWeights::level(std::string_view metric) const {
  auto it = levels.find(metric);
  return it == levels.end() ? WeightLevel::medium : it->second;
}

MetricWeights MetricWeights::all(WeightLevel level) {
  MetricWeights w;
  for (const auto& m : kCatalog) w.levels[std::string(m.id)] = level;
  return w;
}

nlohmann::json CombinationSpec::to_json() const {
  return json{{"llm", llm},
              {"embedder", embedder},
              {"storage_kind", to_string(storage_kind)},
              {"search_type", to_string(search_type)},
              {"distance_metric", to_string(distance_metric)},
              {"rerank", rerank},
              {"chunk_size", chunk_size},
              {"chunk_overlap", chunk_overlap},
              {"top_k", top_k}};
}

std::string CombinationSpec::canonical_text() const { return to_json().dump(); }

CombinationSpec make_combination(CombinationSpec values) {
  values.id = hex64(fnv1a64(values.canonical_text()));
  return values;
}

CombinationSpec combination_from_json(const json& j) {
  try {
    CombinationSpec c;
    c.llm = j.at("llm").get<std::string>();
    c.embedder = j.at("embedder").get<std::string>();
    auto storage = parse_storage_kind(j.at("storage_kind").get<std::string>());
    auto search = parse_search_type(j.at("search_type").get<std::string>());
    auto metric = parse_distance_metric(j.at("distance_metric").get<std::string>());
    if (!storage || !search || !metric) throw ValidationError("combination", "unknown axis value");
    c.storage_kind = *storage;
    c.search_type = *search;
    c.distance_metric = *metric;
    c.rerank = j.at("rerank").get<bool>();
    c.chunk_size = j.at("chunk_size").get<int>();
    c.chunk_overlap = j.at("chunk_overlap").get<int>();
    c.top_k = j.at("top_k").get<int>();
    return make_combination(std::move(c));
  } catch (const json::exception& e) {
    throw ValidationError("combination", e.what());
  }
}

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("$", "top-level payload must be an object");
  reject_unknown_keys(doc, "", {"datasets", "sample_size", "seed", "grid", "thresholds", "weights",
                                "providers", "output_dir", "runtime"});
  ExperimentConfig cfg;
  if (!doc.contains("datasets")) throw ValidationError("datasets", "required");
  cfg.datasets = read_datasets(doc.at("datasets"));

  if (doc.contains("sample_size")) {
    const json& s = doc.at("sample_size");
    if (s.is_string() && s.get<std::string>() == "all") {
      cfg.sample_size.reset();
    } else if (s.is_number_integer() && s.get<long long>() >= 1) {
      cfg.sample_size = static_cast<std::size_t>(s.get<long long>());
    } else {
      throw ValidationError("sample_size", "expected a positive integer or \"all\"");
    }
  }
  if (doc.contains("seed")) cfg.random_seed = read_int(doc.at("seed"), "seed");
  if (!doc.contains("grid")) throw ValidationError("grid", "required");
  cfg.grid = read_grid(doc.at("grid"));
  if (doc.contains("thresholds")) cfg.thresholds = read_thresholds(doc.at("thresholds"));
  if (doc.contains("weights")) cfg.weights = read_weights(doc.at("weights"));
  if (doc.contains("providers")) {
    const json& p = require_object(doc.at("providers"), "providers");
    for (const auto& [name, url] : p.items()) {
      cfg.provider_endpoints[name] = read_string(url, join_path("providers", name));
    }
  }
  if (doc.contains("output_dir")) {
    cfg.output_dir = read_string(doc.at("output_dir"), "output_dir");
    if (cfg.output_dir.empty()) throw ValidationError("output_dir", "must not be empty");
  }
  if (doc.contains("runtime")) cfg.runtime = read_runtime(doc.at("runtime"));
  check_config(cfg);
  return cfg;
}

void check_config(const ExperimentConfig& cfg) {
  if (cfg.datasets.empty()) throw ValidationError("datasets", "at least one dataset is required");
  const GridAxes& g = cfg.grid;
  auto nonempty = [](bool empty, const char* axis) {
    if (empty) throw ValidationError(std::string("grid.") + axis, "axis must not be empty");
  };
  nonempty(g.llms.empty(), "llms");
  nonempty(g.embedders.empty(), "embedders");
  nonempty(g.storage_kinds.empty(), "storage_kinds");
  nonempty(g.search_types.empty(), "search_types");
  nonempty(g.distance_metrics.empty(), "distance_metrics");
  nonempty(g.rerank.empty(), "rerank");
  nonempty(g.chunk_sizes.empty(), "chunk_sizes");
  nonempty(g.chunk_overlaps.empty(), "chunk_overlaps");
  nonempty(g.top_k.empty(), "top_k");
  for (int size : g.chunk_sizes) {
    if (size < 1) throw ValidationError("grid.chunk_sizes", "must be a positive integer");
    for (int overlap : g.chunk_overlaps) {
      if (overlap < 0) throw ValidationError("grid.chunk_overlaps", "must be non-negative");
      if (overlap >= size) {
        throw ValidationError("grid.chunk_overlaps", "overlap must be < chunk size (overlap " +
                                                         std::to_string(overlap) + ", chunk size " +
                                                         std::to_string(size) + ")");
      }
    }
  }
  for (int k : g.top_k) {
    if (k < 1) throw ValidationError("grid.top_k", "must be a positive integer");
  }
  if (cfg.sample_size && *cfg.sample_size == 0) {
    throw ValidationError("sample_size", "expected a positive integer or \"all\"");
  }
}

json config_to_json(const ExperimentConfig& cfg) {
  json doc;
  json datasets = json::array();
  for (const auto& d : cfg.datasets) {
    datasets.push_back({{"name", d.name}, {"path", d.path}, {"format", to_string(d.format)}});
  }
  doc["datasets"] = std::move(datasets);
  doc["sample_size"] = cfg.sample_size ? json(*cfg.sample_size) : json("all");
  doc["seed"] = cfg.random_seed;

  const GridAxes& g = cfg.grid;
  json grid;
  grid["llms"] = g.llms;
  grid["embedders"] = g.embedders;
  auto names = [](const auto& values) {
    json arr = json::array();
    for (auto v : values) arr.push_back(to_string(v));
    return arr;
  };
  grid["storage_kinds"] = names(g.storage_kinds);
  grid["search_types"] = names(g.search_types);
  grid["distance_metrics"] = names(g.distance_metrics);
  json rerank = json::array();
  for (bool b : g.rerank) rerank.push_back(b);
  grid["rerank"] = std::move(rerank);
  grid["chunk_sizes"] = g.chunk_sizes;
  grid["chunk_overlaps"] = g.chunk_overlaps;
  grid["top_k"] = g.top_k;
  doc["grid"] = std::move(grid);

  json thresholds = json::object();
  const ThresholdSet& t = cfg.thresholds;
  if (t.max_total_latency_s) thresholds["max_total_latency_s"] = *t.max_total_latency_s;
  if (t.max_generation_latency_s) thresholds["max_generation_latency_s"] = *t.max_generation_latency_s;
  if (t.max_retrieval_latency_s) thresholds["max_retrieval_latency_s"] = *t.max_retrieval_latency_s;
  if (t.max_vram_bytes) thresholds["max_vram_bytes"] = *t.max_vram_bytes;
  doc["thresholds"] = std::move(thresholds);

  json weights = {{"generation", json::object()},
                  {"retrieval", json::object()},
                  {"hardware", json::object()}};
  for (const auto& m : metric_catalog()) {
    weights[std::string(to_string(m.category))][std::string(m.id)] =
        to_string(cfg.weights.level(m.id));
  }
  doc["weights"] = std::move(weights);

  json providers = json::object();
  for (const auto& [name, url] : cfg.provider_endpoints) providers[name] = url;
  doc["providers"] = std::move(providers);
  doc["output_dir"] = cfg.output_dir;

  const RuntimeOptions& r = cfg.runtime;
  doc["runtime"] = {
      {"sampling_period_ms", r.sampling_period_ms},
      {"request_timeout_s", r.request_timeout_s},
      {"retries", r.retries},
      {"candidate_multiplier", r.candidate_multiplier},
      {"potential_questions", r.potential_questions},
      {"answer_relevancy_operands",
       r.answer_relevancy_operands == RelevancyOperands::question ? "question" : "answer"},
      {"hallucination_direction", to_string(r.hallucination_direction)},
      {"temperature", r.temperature},
      {"decode_top_k", r.decode_top_k},
      {"max_in_flight", r.max_in_flight},
  };
  return doc;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  return config_to_json(cfg).dump(2) + "\n";
}

ExperimentConfig validate_config(std::string_view raw) {
  json doc;
  try {
    doc = json::parse(raw.begin(), raw.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed configuration payload: ") + e.what(), e.byte);
  }
  return config_from_json(doc);
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open configuration file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return validate_config(buf.str());
}

std::vector<CombinationSpec> enumerate_combinations(const GridAxes& g) {
  std::vector<CombinationSpec> out;
  out.reserve(g.cardinality());
  for (const auto& llm : g.llms)
    for (const auto& embedder : g.embedders)
      for (auto storage : g.storage_kinds)
        for (auto search : g.search_types)
          for (auto metric : g.distance_metrics)
            for (bool rerank : g.rerank)
              for (int size : g.chunk_sizes)
                for (int overlap : g.chunk_overlaps)
                  for (int k : g.top_k) {
                    CombinationSpec spec{llm,  embedder, storage, search,     metric, rerank,
                                         size, overlap,  k,       out.size(), {}};
                    out.push_back(make_combination(std::move(spec)));
                  }
  return out;
}

double estimate_cost(double per_line_seconds, long long n_instances, long long n_combinations) {
  if (!(per_line_seconds > 0.0) || n_instances <= 0 || n_combinations <= 0) {
    throw ArgumentError("estimate_cost requires positive arguments");
  }
  return per_line_seconds * static_cast<double>(n_instances) * static_cast<double>(n_combinations);
}

std::string config_fingerprint(const ExperimentConfig& config) {
  return hex64(fnv1a64(serialize_config(config)));
}

}  // namespace ragebench
