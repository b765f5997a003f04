#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "disco/gevd.hpp"
#include "disco/mask.hpp"
#include "disco/room.hpp"
#include "disco/spatial_stats.hpp"

namespace disco {

/// Which step-1 estimates each node broadcasts.
enum class CompressedType { Target, Noise, Both };

/// How a node forms its noise estimate z_n: the same GEVD filter driven by
/// the complement mask, or the residual y_ref - z_s.
enum class NoiseEstimate { Wiener, Residual };

std::string to_string(CompressedType type);
std::string to_string(MaskPolicy policy);
std::string to_string(NoiseEstimate estimate);
CompressedType parse_compressed_type(const std::string& text);
MaskPolicy parse_mask_policy(const std::string& text);
NoiseEstimate parse_noise_estimate(const std::string& text);

inline std::size_t compressed_per_node(CompressedType type) { return type == CompressedType::Both ? 2 : 1; }

struct PipelineConfig {
  MaskPolicy mask_policy = MaskPolicy::Local;
  CompressedType compressed = CompressedType::Target;
  double mu = 1.0;
  MaskProvider step1_masks = MaskProvider::oracle();
  MaskProvider step2_masks = MaskProvider::oracle();
  NoiseEstimate noise_estimate = NoiseEstimate::Wiener;
  FilterRule rule = FilterRule::GevdSdw;
};

struct Step1Result {
  std::shared_ptr<const Spectrogram> z_s;
  std::shared_ptr<const Spectrogram> z_n;
  BeamformerWeights w_kk;  // speech filter
  BeamformerWeights v_kk;  // noise filter (empty for the residual estimate)
};

/// Local-only filtering of one node: z_s = w_kk^H y_k and the matching noise
/// estimate z_n.
Step1Result step1_compress(const StackedSpectra& local, const TfMask& mask, double mu,
                           NoiseEstimate noise_estimate = NoiseEstimate::Wiener,
                           FilterRule rule = FilterRule::GevdSdw);

struct ReceivedSignal {
  ChannelOrigin origin;
  std::shared_ptr<const Spectrogram> signal;
  std::shared_ptr<const TfMask> sender_mask;  // distant policy only
};

/// Runtime state of one node across both steps.
struct NodeBundle {
  std::size_t node_id = 0;
  StackedSpectra local;
  std::shared_ptr<const TfMask> step1_mask;
  std::optional<Step1Result> step1;
  std::vector<ReceivedSignal> received;
  std::shared_ptr<const TfMask> step2_mask;
  BeamformerWeights w_k;
  std::size_t step2_channels = 0;
  std::optional<Spectrogram> output;
};

/// What crossed node boundaries during one exchange.
struct ExchangeStats {
  std::size_t signals = 0;
  std::size_t signal_bytes = 0;  // complex float32 per TF cell
  std::size_t masks = 0;
  std::size_t mask_bytes = 0;  // float32 per TF cell
};

/// Fully-connected broadcast of step-1 outputs. Each node receives the other
/// nodes' signals in ascending sender order (z_s before z_n per sender).
/// Under the distant policy each sender's step-1 mask travels once per
/// receiving node.
ExchangeStats exchange(std::vector<NodeBundle>& bundles, CompressedType type, MaskPolicy policy);

/// Joint filter over [y_k; z_-k] driven by the node's step-2 mask.
const Spectrogram& step2_enhance(NodeBundle& bundle, const PipelineConfig& config);

/// Spectra and (optionally) clean reference-mic images of one node.
struct NodeInput {
  std::vector<Spectrogram> mics;
  std::optional<Spectrogram> speech_ref;
  std::optional<Spectrogram> noise_ref;
};

struct TwoStepResult {
  std::vector<NodeBundle> bundles;
  ExchangeStats exchange;
};

/// Step 1 on every node, exchange, then step 2 on every node.
TwoStepResult run_two_step(std::vector<NodeInput> nodes, const PipelineConfig& config, const std::string& scene_id);

struct NodeOutput {
  TimeSignal step1;  // z_s
  TimeSignal step2;  // s_hat
  std::size_t step1_channels = 0;
  std::size_t step2_channels = 0;
  double input_sir_db = 0.0;
};

struct StageTiming {
  double analysis_ms = 0.0;
  double step1_ms = 0.0;
  double step2_ms = 0.0;
  double synthesis_ms = 0.0;
};

struct PipelineResult {
  std::string scene_id;
  std::vector<NodeOutput> nodes;
  ExchangeStats exchange;
  StageTiming timing;
  std::vector<std::string> masks_used;  // per node and step, e.g. "node1 step1 oracle"
};

/// analyze -> step 1 -> exchange -> step 2 -> synthesize, all nodes.
PipelineResult run_pipeline(const RenderedScene& scene, const PipelineConfig& config);

/// Machine-readable manifest of a run (config, masks, channel counts, SIRs).
std::string manifest_json(const PipelineResult& result, const PipelineConfig& config);

}  // namespace disco
