#include "ragebench/telemetry.hpp"

#include <dlfcn.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <limits>
#include <fstream>
#include <sstream>

#include "ragebench/errors.hpp"

namespace ragebench {

using nlohmann::json;

double monotonic_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

TelemetrySummary summarize_samples(std::span<const TelemetrySample> samples) {
  if (samples.empty()) throw Error("cannot summarize an empty sample set");
  TelemetrySummary s;
  s.sample_count = samples.size();
  // Byte counts accumulate exactly in long double; cpu values are summed in
  // sorted order. Either way a permutation of the input gives the same result.
  std::vector<double> cpu;
  cpu.reserve(samples.size());
  long double rss = 0, ram = 0, vram = 0;
  std::size_t vram_n = 0;
  for (const auto& x : samples) {
    cpu.push_back(x.cpu_percent);
    s.max_cpu_percent = std::max(s.max_cpu_percent, x.cpu_percent);
    rss += static_cast<long double>(x.process_rss_bytes);
    ram += static_cast<long double>(x.system_ram_bytes_used);
    s.max_process_rss_bytes = std::max(s.max_process_rss_bytes, x.process_rss_bytes);
    s.max_system_ram_bytes_used = std::max(s.max_system_ram_bytes_used, x.system_ram_bytes_used);
    if (x.vram_bytes_used) {
      vram += static_cast<long double>(*x.vram_bytes_used);
      ++vram_n;
      s.max_vram_bytes = std::max(s.max_vram_bytes.value_or(0), *x.vram_bytes_used);
    }
  }
  std::sort(cpu.begin(), cpu.end());
  double cpu_sum = 0.0;
  for (double c : cpu) cpu_sum += c;
  const auto n = static_cast<long double>(samples.size());
  s.mean_cpu_percent = cpu_sum / static_cast<double>(samples.size());
  s.mean_process_rss_bytes = static_cast<double>(rss / n);
  s.mean_system_ram_bytes_used = static_cast<double>(ram / n);
  if (vram_n > 0) s.mean_vram_bytes = static_cast<double>(vram / static_cast<long double>(vram_n));
  return s;
}

json to_json(const TelemetrySample& s) {
  json j{{"t", s.timestamp_monotonic_s},
         {"cpu_percent", s.cpu_percent},
         {"process_rss_bytes", s.process_rss_bytes},
         {"system_ram_bytes_used", s.system_ram_bytes_used}};
  j["vram_bytes_used"] = s.vram_bytes_used ? json(*s.vram_bytes_used) : json(nullptr);
  return j;
}

json to_json(const TelemetrySummary& s) {
  json j{{"sample_count", s.sample_count},
         {"mean_cpu_percent", s.mean_cpu_percent},
         {"max_cpu_percent", s.max_cpu_percent},
         {"mean_process_rss_bytes", s.mean_process_rss_bytes},
         {"max_process_rss_bytes", s.max_process_rss_bytes},
         {"mean_system_ram_bytes_used", s.mean_system_ram_bytes_used},
         {"max_system_ram_bytes_used", s.max_system_ram_bytes_used},
         {"vram_available", s.vram_available()}};
  j["mean_vram_bytes"] = s.mean_vram_bytes ? json(*s.mean_vram_bytes) : json(nullptr);
  j["max_vram_bytes"] = s.max_vram_bytes ? json(*s.max_vram_bytes) : json(nullptr);
  return j;
}

json to_json(const LatencyBreakdown& l) {
  return json{{"retrieval_latency_s", l.retrieval_latency_s},
              {"generation_latency_s", l.generation_latency_s},
              {"total_latency_s", l.total_latency_s},
              {"overhead_s", l.overhead_s}};
}

TelemetrySummary summary_from_json(const json& j) {
  TelemetrySummary s;
  s.sample_count = j.at("sample_count").get<std::size_t>();
  s.mean_cpu_percent = j.at("mean_cpu_percent").get<double>();
  s.max_cpu_percent = j.at("max_cpu_percent").get<double>();
  s.mean_process_rss_bytes = j.at("mean_process_rss_bytes").get<double>();
  s.max_process_rss_bytes = j.at("max_process_rss_bytes").get<std::uint64_t>();
  s.mean_system_ram_bytes_used = j.at("mean_system_ram_bytes_used").get<double>();
  s.max_system_ram_bytes_used = j.at("max_system_ram_bytes_used").get<std::uint64_t>();
  if (!j.at("mean_vram_bytes").is_null()) s.mean_vram_bytes = j["mean_vram_bytes"].get<double>();
  if (!j.at("max_vram_bytes").is_null()) s.max_vram_bytes = j["max_vram_bytes"].get<std::uint64_t>();
  return s;
}

LatencyBreakdown latency_from_json(const json& j) {
  return LatencyBreakdown{j.at("retrieval_latency_s").get<double>(),
                          j.at("generation_latency_s").get<double>(),
                          j.at("total_latency_s").get<double>(), j.at("overhead_s").get<double>()};
}

// --- SystemProbe --------------------------------------------------------------

namespace {

// Subset of the NVML ABI used here.
struct NvmlMemory {
  unsigned long long total;
  unsigned long long free;
  unsigned long long used;
};
using NvmlInit = int (*)();
using NvmlShutdown = int (*)();
using NvmlHandleByIndex = int (*)(unsigned int, void**);
using NvmlMemoryInfo = int (*)(void*, NvmlMemory*);

double process_cpu_seconds() {
  std::ifstream in("/proc/self/stat");
  std::string line;
  if (!std::getline(in, line)) return -1.0;
  // Fields after the parenthesised command name; utime and stime are 14 and 15.
  const auto close = line.rfind(')');
  if (close == std::string::npos) return -1.0;
  std::istringstream rest(line.substr(close + 2));
  std::string field;
  unsigned long long utime = 0, stime = 0;
  for (int i = 3; rest >> field; ++i) {
    if (i == 14) utime = std::stoull(field);
    if (i == 15) {
      stime = std::stoull(field);
      break;
    }
  }
  const long ticks = sysconf(_SC_CLK_TCK);
  return ticks > 0 ? static_cast<double>(utime + stime) / static_cast<double>(ticks) : -1.0;
}

std::uint64_t process_rss() {
  std::ifstream in("/proc/self/statm");
  unsigned long long size = 0, resident = 0;
  if (!(in >> size >> resident)) return 0;
  return resident * static_cast<std::uint64_t>(sysconf(_SC_PAGESIZE));
}

std::uint64_t system_ram_used() {
  std::ifstream in("/proc/meminfo");
  std::string key;
  unsigned long long value = 0, total = 0, available = 0;
  std::string unit;
  while (in >> key >> value) {
    std::getline(in, unit);
    if (key == "MemTotal:") total = value;
    if (key == "MemAvailable:") available = value;
  }
  return total >= available ? (total - available) * 1024ULL : 0;
}

}  // namespace

struct SystemProbe::Gpu {
  void* lib = nullptr;
  void* device = nullptr;
  NvmlShutdown shutdown = nullptr;
  NvmlMemoryInfo memory = nullptr;

  ~Gpu() {
    if (shutdown) shutdown();
    if (lib) dlclose(lib);
  }
};

SystemProbe::SystemProbe() {
  auto gpu = std::make_unique<Gpu>();
  gpu->lib = dlopen("libnvidia-ml.so.1", RTLD_NOW | RTLD_LOCAL);
  if (gpu->lib == nullptr) {
    warnings_.push_back("vram-unavailable: NVIDIA management library not found");
  } else {
    auto init = reinterpret_cast<NvmlInit>(dlsym(gpu->lib, "nvmlInit_v2"));
    auto by_index = reinterpret_cast<NvmlHandleByIndex>(dlsym(gpu->lib, "nvmlDeviceGetHandleByIndex_v2"));
    gpu->memory = reinterpret_cast<NvmlMemoryInfo>(dlsym(gpu->lib, "nvmlDeviceGetMemoryInfo"));
    auto shutdown = reinterpret_cast<NvmlShutdown>(dlsym(gpu->lib, "nvmlShutdown"));
    if (!init || !by_index || !gpu->memory || init() != 0) {
      warnings_.push_back("vram-unavailable: NVIDIA management library failed to initialise");
    } else {
      gpu->shutdown = shutdown;
      if (by_index(0, &gpu->device) != 0) {
        warnings_.push_back("vram-unavailable: no GPU device 0");
      } else {
        gpu_ = std::move(gpu);
      }
    }
  }
  if (process_cpu_seconds() < 0.0) warnings_.push_back("cpu-unavailable: /proc/self/stat unreadable");
}

SystemProbe::~SystemProbe() = default;

bool SystemProbe::vram_observable() const { return gpu_ != nullptr; }

ProbeReading SystemProbe::read() {
  ProbeReading r;
  const double cpu = process_cpu_seconds();
  const double wall = monotonic_seconds();
  {
    std::lock_guard lock(mutex_);
    if (cpu >= 0.0 && last_cpu_s_ >= 0.0 && wall > last_wall_s_) {
      r.cpu_percent = 100.0 * (cpu - last_cpu_s_) / (wall - last_wall_s_);
    }
    last_cpu_s_ = cpu;
    last_wall_s_ = wall;
  }
  r.process_rss_bytes = process_rss();
  r.system_ram_bytes_used = system_ram_used();
  if (gpu_) {
    NvmlMemory mem{};
    if (gpu_->memory(gpu_->device, &mem) == 0) r.vram_bytes_used = mem.used;
  }
  return r;
}

// --- ScriptedProbe --------------------------------------------------------------

ScriptedProbe::ScriptedProbe(Fn fn, bool vram_observable)
    : fn_(std::move(fn)), vram_observable_(vram_observable) {}

ProbeReading ScriptedProbe::read() {
  std::lock_guard lock(mutex_);
  auto r = fn_(tag_, index_++);
  if (!vram_observable_) r.vram_bytes_used.reset();
  return r;
}

std::vector<std::string> ScriptedProbe::warnings() const {
  if (vram_observable_) return {};
  return {"vram-unavailable: scripted probe without VRAM"};
}

void ScriptedProbe::begin_trial(const TrialTag& tag) {
  std::lock_guard lock(mutex_);
  tag_ = tag;
  index_ = 0;
}

// --- Sampler -------------------------------------------------------------------

Sampler::Sampler(ResourceProbe& probe, int period_ms, SampleSink sink)
    : probe_(probe), sink_(std::move(sink)), period_(period_ms) {
  take();
  worker_ = std::jthread([this](std::stop_token token) {
    auto next = std::chrono::steady_clock::now() + period_;
    std::mutex m;
    std::condition_variable_any cv;
    std::unique_lock lock(m);
    while (!token.stop_requested()) {
      if (cv.wait_until(lock, token, next, [] { return false; })) break;
      if (token.stop_requested()) break;
      take();
      next += period_;
    }
  });
}

Sampler::~Sampler() { stop(); }

void Sampler::stop() {
  if (stopped_.exchange(true)) return;
  worker_.request_stop();
  if (worker_.joinable()) worker_.join();
  take();
}

void Sampler::take() {
  std::lock_guard lock(mutex_);
  const ProbeReading r = probe_.read();
  TelemetrySample s;
  s.timestamp_monotonic_s = monotonic_seconds();
  if (s.timestamp_monotonic_s <= last_ts_) {
    s.timestamp_monotonic_s = std::nextafter(last_ts_, std::numeric_limits<double>::infinity());
  }
  last_ts_ = s.timestamp_monotonic_s;
  s.cpu_percent = r.cpu_percent;
  s.process_rss_bytes = r.process_rss_bytes;
  s.system_ram_bytes_used = r.system_ram_bytes_used;
  s.vram_bytes_used = r.vram_bytes_used;
  ++count_;
  if (sink_) sink_(s);
}

std::unique_ptr<Sampler> run_sampler(ResourceProbe& probe, int period_ms, SampleSink sink) {
  if (period_ms < 10) throw ArgumentError("sampling period must be at least 10 ms");
  return std::make_unique<Sampler>(probe, period_ms, std::move(sink));
}

}  // namespace ragebench
