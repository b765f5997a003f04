#include "disco/danse.hpp"

#include <chrono>

#include <json.hpp>

#include "disco/error.hpp"

namespace disco {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

StackedSpectra stack_local(std::size_t node, std::vector<Spectrogram> mics) {
  StackedSpectra s;
  for (auto& m : mics)
    s.add(std::make_shared<const Spectrogram>(std::move(m)), {ChannelOrigin::Kind::LocalMic, node});
  return s;
}

bool sends_target(CompressedType t) { return t != CompressedType::Noise; }
bool sends_noise(CompressedType t) { return t != CompressedType::Target; }

}  // namespace

std::string to_string(CompressedType type) {
  switch (type) {
    case CompressedType::Target: return "target";
    case CompressedType::Noise: return "noise";
    case CompressedType::Both: return "both";
  }
  return "target";
}

std::string to_string(MaskPolicy policy) { return policy == MaskPolicy::Local ? "local" : "distant"; }

std::string to_string(NoiseEstimate estimate) { return estimate == NoiseEstimate::Wiener ? "wiener" : "residual"; }

CompressedType parse_compressed_type(const std::string& text) {
  if (text == "target") return CompressedType::Target;
  if (text == "noise") return CompressedType::Noise;
  if (text == "both") return CompressedType::Both;
  throw Error(ErrorKind::Config, "unknown compressed signal type '" + text + "'");
}

MaskPolicy parse_mask_policy(const std::string& text) {
  if (text == "local") return MaskPolicy::Local;
  if (text == "distant") return MaskPolicy::Distant;
  throw Error(ErrorKind::Config, "unknown mask policy '" + text + "'");
}

NoiseEstimate parse_noise_estimate(const std::string& text) {
  if (text == "wiener") return NoiseEstimate::Wiener;
  if (text == "residual") return NoiseEstimate::Residual;
  throw Error(ErrorKind::Config, "unknown noise estimate '" + text + "'");
}

Step1Result step1_compress(const StackedSpectra& local, const TfMask& mask, double mu, NoiseEstimate noise_estimate,
                           FilterRule rule) {
  Step1Result out;
  const auto cov = masked_covariances(local, mask, MaskPolicy::Local);
  out.w_kk = filter_weights(cov, mu, rule);
  auto z_s = std::make_shared<Spectrogram>(apply_weights(out.w_kk, local));
  if (noise_estimate == NoiseEstimate::Wiener) {
    const auto swapped = masked_covariances(local, complement(mask), MaskPolicy::Local);
    out.v_kk = filter_weights(swapped, mu, rule);
    out.z_n = std::make_shared<const Spectrogram>(apply_weights(out.v_kk, local));
  } else {
    auto z_n = std::make_shared<Spectrogram>(*local.channels.front());
    z_n->bins -= z_s->bins;
    out.z_n = std::move(z_n);
  }
  out.z_s = std::move(z_s);
  return out;
}

ExchangeStats exchange(std::vector<NodeBundle>& bundles, CompressedType type, MaskPolicy policy) {
  for (const auto& b : bundles) {
    if (!b.step1) throw Error(ErrorKind::Protocol, "node " + std::to_string(b.node_id + 1) + " has no step-1 result");
    if (policy == MaskPolicy::Distant && !b.step1_mask)
      throw Error(ErrorKind::Protocol, "node " + std::to_string(b.node_id + 1) + " has no step-1 mask to send");
  }
  ExchangeStats stats;
  for (auto& receiver : bundles) {
    receiver.received.clear();
    for (const auto& sender : bundles) {
      if (sender.node_id == receiver.node_id) continue;
      const auto& z = *sender.step1;
      std::shared_ptr<const TfMask> mask;
      if (policy == MaskPolicy::Distant) {
        mask = sender.step1_mask;
        ++stats.masks;
        stats.mask_bytes += 4 * static_cast<std::size_t>(mask->n_bins() * mask->n_frames());
      }
      auto send = [&](ChannelOrigin::Kind kind, const std::shared_ptr<const Spectrogram>& sig) {
        receiver.received.push_back({{kind, sender.node_id}, sig, mask});
        ++stats.signals;
        stats.signal_bytes += 8 * static_cast<std::size_t>(sig->n_bins() * sig->n_frames());
      };
      if (sends_target(type)) send(ChannelOrigin::Kind::TargetEstimate, z.z_s);
      if (sends_noise(type)) send(ChannelOrigin::Kind::NoiseEstimate, z.z_n);
    }
  }
  return stats;
}

const Spectrogram& step2_enhance(NodeBundle& bundle, const PipelineConfig& config) {
  if (!bundle.step2_mask) throw Error(ErrorKind::Protocol, "node " + std::to_string(bundle.node_id + 1) + " has no step-2 mask");
  StackedSpectra stacked = bundle.local;
  for (const auto& r : bundle.received) stacked.add(r.signal, r.origin, r.sender_mask);
  const auto cov = masked_covariances(stacked, *bundle.step2_mask, config.mask_policy);
  bundle.w_k = filter_weights(cov, config.mu, config.rule);
  bundle.step2_channels = stacked.size();
  bundle.output = apply_weights(bundle.w_k, stacked);
  return *bundle.output;
}

namespace {

std::vector<NodeBundle> prepare_bundles(std::vector<NodeInput>& nodes, const PipelineConfig& config,
                                        const std::string& scene_id) {
  std::vector<NodeBundle> bundles(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    auto& in = nodes[k];
    if (in.mics.empty()) throw Error(ErrorKind::Size, "node " + std::to_string(k + 1) + " has no microphones");
    auto& b = bundles[k];
    b.node_id = k;
    MaskRequest req{scene_id, k, 1, &in.mics.front(), in.speech_ref ? &*in.speech_ref : nullptr,
                    in.noise_ref ? &*in.noise_ref : nullptr};
    b.step1_mask = std::make_shared<const TfMask>(get_mask(config.step1_masks, req));
    req.step = 2;
    b.step2_mask = std::make_shared<const TfMask>(get_mask(config.step2_masks, req));
    b.local = stack_local(k, std::move(in.mics));
  }
  return bundles;
}

void run_step1(std::vector<NodeBundle>& bundles, const PipelineConfig& config) {
  for (auto& b : bundles)
    b.step1 = step1_compress(b.local, *b.step1_mask, config.mu, config.noise_estimate, config.rule);
}

}  // namespace

TwoStepResult run_two_step(std::vector<NodeInput> nodes, const PipelineConfig& config, const std::string& scene_id) {
  TwoStepResult out;
  out.bundles = prepare_bundles(nodes, config, scene_id);
  run_step1(out.bundles, config);
  out.exchange = exchange(out.bundles, config.compressed, config.mask_policy);
  for (auto& b : out.bundles) step2_enhance(b, config);
  return out;
}

PipelineResult run_pipeline(const RenderedScene& scene, const PipelineConfig& config) {
  PipelineResult result;
  result.scene_id = scene.descriptor.scene_id;
  const bool needs_clean = config.step1_masks.mode == MaskProvider::Mode::OracleIrm ||
                           config.step2_masks.mode == MaskProvider::Mode::OracleIrm;

  auto t0 = Clock::now();
  std::vector<NodeInput> inputs;
  for (const auto& node : scene.nodes) {
    NodeInput in;
    for (const auto& y : node.mixture) in.mics.push_back(analyze(y));
    if (needs_clean) {
      in.speech_ref = analyze(node.speech.front());
      in.noise_ref = analyze(node.noise.front());
    }
    inputs.push_back(std::move(in));
  }
  auto bundles = prepare_bundles(inputs, config, result.scene_id);
  result.timing.analysis_ms = ms_since(t0);

  t0 = Clock::now();
  run_step1(bundles, config);
  result.timing.step1_ms = ms_since(t0);

  t0 = Clock::now();
  result.exchange = exchange(bundles, config.compressed, config.mask_policy);
  for (auto& b : bundles) step2_enhance(b, config);
  result.timing.step2_ms = ms_since(t0);

  t0 = Clock::now();
  const std::size_t length = scene.length();
  for (std::size_t k = 0; k < bundles.size(); ++k) {
    const auto& b = bundles[k];
    NodeOutput out;
    out.step1 = synthesize(*b.step1->z_s, length);
    out.step2 = synthesize(*b.output, length);
    out.step1_channels = b.local.size();
    out.step2_channels = b.step2_channels;
    out.input_sir_db = scene.nodes[k].input_sir_db;
    result.nodes.push_back(std::move(out));
    for (int step = 1; step <= 2; ++step)
      result.masks_used.push_back("node" + std::to_string(k + 1) + " step" + std::to_string(step) + " " +
                                  (step == 1 ? config.step1_masks : config.step2_masks).describe());
  }
  result.timing.synthesis_ms = ms_since(t0);
  return result;
}

std::string manifest_json(const PipelineResult& result, const PipelineConfig& config) {
  using nlohmann::json;
  json j;
  j["format"] = "disco-manifest/1";
  j["scene_id"] = result.scene_id;
  j["config"] = {{"mask_policy", to_string(config.mask_policy)},
                 {"compressed", to_string(config.compressed)},
                 {"mu", config.mu},
                 {"step1_masks", config.step1_masks.describe()},
                 {"step2_masks", config.step2_masks.describe()},
                 {"noise_estimate", to_string(config.noise_estimate)},
                 {"filter", config.rule == FilterRule::GevdSdw ? "gevd-sdw" : "baseline-sdw"}};
  j["masks_used"] = result.masks_used;
  json nodes = json::array();
  for (std::size_t k = 0; k < result.nodes.size(); ++k) {
    const auto& n = result.nodes[k];
    nodes.push_back({{"node", k + 1},
                     {"input_sir_db", n.input_sir_db},
                     {"step1_channels", n.step1_channels},
                     {"step2_channels", n.step2_channels},
                     {"outputs", {result.scene_id + "_node" + std::to_string(k + 1) + "_step1.wav",
                                  result.scene_id + "_node" + std::to_string(k + 1) + "_step2.wav"}}});
  }
  j["nodes"] = nodes;
  j["timing_ms"] = {{"analysis", result.timing.analysis_ms},
                    {"step1", result.timing.step1_ms},
                    {"step2", result.timing.step2_ms},
                    {"synthesis", result.timing.synthesis_ms}};
  j["exchange"] = {{"signals", result.exchange.signals},
                   {"signal_bytes", result.exchange.signal_bytes},
                   {"masks", result.exchange.masks},
                   {"mask_bytes", result.exchange.mask_bytes}};
  return j.dump(2) + "\n";
}

}  // namespace disco
