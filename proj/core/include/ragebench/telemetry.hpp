#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace ragebench {

struct TelemetrySample {
  double timestamp_monotonic_s = 0.0;
  double cpu_percent = 0.0;
  std::uint64_t process_rss_bytes = 0;
  std::uint64_t system_ram_bytes_used = 0;
  std::optional<std::uint64_t> vram_bytes_used;
};

struct TelemetrySummary {
  std::size_t sample_count = 0;
  double mean_cpu_percent = 0.0;
  double max_cpu_percent = 0.0;
  double mean_process_rss_bytes = 0.0;
  std::uint64_t max_process_rss_bytes = 0;
  double mean_system_ram_bytes_used = 0.0;
  std::uint64_t max_system_ram_bytes_used = 0;
  /// Both absent when no sample observed VRAM.
  std::optional<double> mean_vram_bytes;
  std::optional<std::uint64_t> max_vram_bytes;

  bool vram_available() const noexcept { return max_vram_bytes.has_value(); }
  bool operator==(const TelemetrySummary&) const = default;
};

/// total_latency_s covers the whole trial; overhead_s = total - retrieval - generation.
struct LatencyBreakdown {
  double retrieval_latency_s = 0.0;
  double generation_latency_s = 0.0;
  double total_latency_s = 0.0;
  double overhead_s = 0.0;
  bool operator==(const LatencyBreakdown&) const = default;
};

/// Throws Error on an empty span. Mean and max are order-independent.
TelemetrySummary summarize_samples(std::span<const TelemetrySample> samples);

nlohmann::json to_json(const TelemetrySample& s);
nlohmann::json to_json(const TelemetrySummary& s);
nlohmann::json to_json(const LatencyBreakdown& l);
TelemetrySummary summary_from_json(const nlohmann::json& j);
LatencyBreakdown latency_from_json(const nlohmann::json& j);

/// Whatever a probe reads at one instant; the sampler adds the timestamp.
struct ProbeReading {
  double cpu_percent = 0.0;
  std::uint64_t process_rss_bytes = 0;
  std::uint64_t system_ram_bytes_used = 0;
  std::optional<std::uint64_t> vram_bytes_used;
};

/// Identifies the trial a sampler runs for, so scripted probes can vary
/// readings per combination.
struct TrialTag {
  std::string combination_id;
  std::size_t combination_ordinal = 0;
  std::size_t instance = 0;
};

class ResourceProbe {
 public:
  virtual ~ResourceProbe() = default;
  virtual ProbeReading read() = 0;
  virtual bool vram_observable() const = 0;
  /// Capability downgrades detected while opening the probe.
  virtual std::vector<std::string> warnings() const { return {}; }
  virtual void begin_trial(const TrialTag&) {}
};

/// /proc readings for CPU and RAM. VRAM comes from the NVIDIA management
/// library (device 0, device-global) when it can be loaded at runtime;
/// otherwise VRAM is reported absent and a warning is recorded.
class SystemProbe final : public ResourceProbe {
 public:
  SystemProbe();
  ~SystemProbe() override;
  SystemProbe(const SystemProbe&) = delete;
  SystemProbe& operator=(const SystemProbe&) = delete;

  ProbeReading read() override;
  bool vram_observable() const override;
  std::vector<std::string> warnings() const override { return warnings_; }

 private:
  struct Gpu;
  std::unique_ptr<Gpu> gpu_;
  std::vector<std::string> warnings_;
  std::mutex mutex_;
  double last_cpu_s_ = -1.0;
  double last_wall_s_ = 0.0;
};

/// Test and fault-injection probe: `fn(tag, index)` yields the reading for the
/// index-th sample of the current trial.
class ScriptedProbe final : public ResourceProbe {
 public:
  using Fn = std::function<ProbeReading(const TrialTag&, std::size_t)>;
  ScriptedProbe(Fn fn, bool vram_observable);

  ProbeReading read() override;
  bool vram_observable() const override { return vram_observable_; }
  std::vector<std::string> warnings() const override;
  void begin_trial(const TrialTag& tag) override;

 private:
  Fn fn_;
  bool vram_observable_;
  std::mutex mutex_;
  TrialTag tag_;
  std::size_t index_ = 0;
};

using SampleSink = std::function<void(const TelemetrySample&)>;

double monotonic_seconds();

/// Background sampler. The first sample is taken synchronously inside the
/// constructor and a final one by stop(), so every trial has at least two.
class Sampler {
 public:
  Sampler(ResourceProbe& probe, int period_ms, SampleSink sink);
  ~Sampler();
  Sampler(const Sampler&) = delete;
  Sampler& operator=(const Sampler&) = delete;

  /// Joins the worker and emits the final sample. Later calls do nothing.
  void stop();
  std::size_t sample_count() const noexcept { return count_.load(); }

 private:
  void take();

  ResourceProbe& probe_;
  SampleSink sink_;
  std::chrono::milliseconds period_;
  std::mutex mutex_;  // serializes take() between worker and stop()
  double last_ts_ = -1.0;
  std::atomic<std::size_t> count_{0};
  std::atomic<bool> stopped_{false};
  std::jthread worker_;
};

/// Throws ArgumentError when period_ms < 10.
std::unique_ptr<Sampler> run_sampler(ResourceProbe& probe, int period_ms, SampleSink sink);

}  // namespace ragebench
