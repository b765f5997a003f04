#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "disco/danse.hpp"
#include "disco/scene.hpp"

namespace disco {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitConfig = 2;

/// Worker count: DISCO_WORKERS if set, else `requested`, else the hardware
/// concurrency. Always at least 1.
std::size_t resolve_workers(std::optional<std::size_t> requested);

/// Runs fn(0..n-1) on `workers` threads. Returns one message per failed
/// index (empty string for success).
std::vector<std::string> parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

struct GenerateOptions {
  ConfigType config = ConfigType::Random;
  std::size_t n = 10;
  std::uint64_t seed = 0;
  bool synthetic_fixtures = false;
  double fixture_seconds = 3.0;
  std::filesystem::path speech_dir;
  std::filesystem::path noise_dir;
  std::filesystem::path out_dir;
  bool snr_report = false;
  std::optional<std::size_t> workers;
};

struct EnhanceOptions {
  std::filesystem::path corpus;
  std::filesystem::path out_dir;
  PipelineConfig pipeline;
  bool passthrough = false;  // write the reference-mic mixture as both outputs
  std::optional<std::size_t> workers;
};

struct EvaluateOptions {
  std::filesystem::path corpus;
  std::filesystem::path run_dir;
  std::filesystem::path out_dir;  // defaults to run_dir
  std::string label;
  std::optional<std::size_t> workers;
};

/// Output waveform name of one node and step (node 0-based).
std::string output_name(const std::string& scene_id, std::size_t node, int step);

/// Histogram text of per-node input SIRs in 2 dB bins.
std::string snr_histogram(const std::vector<double>& sirs);

/// Each returns an exit code and logs progress and per-scene failures to
/// stderr. Configuration problems throw disco::Error before any work starts.
int cmd_generate(const GenerateOptions& options);
int cmd_enhance(const EnhanceOptions& options);
int cmd_evaluate(const EvaluateOptions& options);

}  // namespace disco
