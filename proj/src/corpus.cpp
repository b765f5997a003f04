#include "disco/corpus.hpp"

#include <json.hpp>

#include "disco/error.hpp"
#include "disco/mask.hpp"
#include "disco/mask_file.hpp"
#include "disco/stft.hpp"
#include "disco/wav.hpp"
#include "file_util.hpp"

namespace disco {

std::filesystem::path CorpusLayout::node_wav(const std::string& id, std::size_t node, const std::string& kind) const {
  return scene_dir(id) / ("node" + std::to_string(node + 1) + "_" + kind + ".wav");
}

std::filesystem::path CorpusLayout::dry_wav(const std::string& id, const std::string& kind) const {
  return scene_dir(id) / ("dry_" + kind + ".wav");
}

std::string corpus_info_json(const CorpusInfo& info) {
  nlohmann::json j;
  j["format"] = "disco-corpus/1";
  j["version"] = kVersion;
  j["config"] = to_string(info.config);
  j["n"] = info.n;
  j["seed"] = info.seed;
  j["synthetic_fixtures"] = info.synthetic_fixtures;
  j["fixture_seconds"] = info.fixture_seconds;
  j["speech_files"] = info.speech_files;
  j["noise_files"] = info.noise_files;
  j["scenes"] = info.scenes;
  return j.dump(2) + "\n";
}

CorpusInfo read_corpus_info(const std::filesystem::path& root) {
  const auto path = root / "corpus.json";
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::Io, "no corpus at " + root.string() + " (corpus.json missing)");
  try {
    const auto j = nlohmann::json::parse(detail::read_file(path));
    if (j.at("format") != "disco-corpus/1") throw Error(ErrorKind::Format, "unknown corpus format in " + path.string());
    CorpusInfo info;
    info.config = parse_config_type(j.at("config").get<std::string>());
    info.n = j.at("n").get<std::size_t>();
    info.seed = j.at("seed").get<std::uint64_t>();
    info.synthetic_fixtures = j.at("synthetic_fixtures").get<bool>();
    info.fixture_seconds = j.at("fixture_seconds").get<double>();
    info.speech_files = j.at("speech_files").get<std::vector<std::string>>();
    info.noise_files = j.at("noise_files").get<std::vector<std::string>>();
    info.scenes = j.at("scenes").get<std::vector<std::string>>();
    return info;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, path.string() + ": " + e.what());
  }
}

namespace {

void round_f32(TimeSignal& s) {
  for (double& v : s.samples) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace

void quantize_float32(RenderedScene& scene) {
  round_f32(scene.dry_speech);
  round_f32(scene.dry_noise);
  for (auto& node : scene.nodes) {
    for (auto& s : node.speech) round_f32(s);
    for (auto& n : node.noise) round_f32(n);
    for (std::size_t m = 0; m < node.mixture.size(); ++m)
      for (std::size_t i = 0; i < node.mixture[m].size(); ++i)
        node.mixture[m].samples[i] = node.speech[m].samples[i] + node.noise[m].samples[i];
    if (!node.speech.empty()) node.input_sir_db = energy_ratio_db(node.speech[0].samples, node.noise[0].samples);
  }
}

TfMask oracle_mask(const RenderedNode& node) {
  return irm(analyze(node.speech.at(0)), analyze(node.noise.at(0)));
}

void save_rendered(const RenderedScene& scene, const CorpusLayout& layout) {
  const auto& id = scene.descriptor.scene_id;
  std::filesystem::create_directories(layout.scene_dir(id));
  write_scene(scene.descriptor, layout.scene_json(id));
  write_wav(scene.dry_speech, layout.dry_wav(id, "speech"), WavCodec::Float32);
  write_wav(scene.dry_noise, layout.dry_wav(id, "noise"), WavCodec::Float32);
  for (std::size_t k = 0; k < scene.nodes.size(); ++k) {
    const auto& node = scene.nodes[k];
    write_wav_channels(node.speech, layout.node_wav(id, k, "speech"), WavCodec::Float32);
    write_wav_channels(node.noise, layout.node_wav(id, k, "noise"), WavCodec::Float32);
    write_wav_channels(node.mixture, layout.node_wav(id, k, "mix"), WavCodec::Float32);
    const TfMask mask = oracle_mask(node);
    for (int step = 1; step <= 2; ++step) store_mask(mask, mask_path(layout.root(), id, k, step));
  }
}

RenderedScene load_rendered(const CorpusLayout& layout, const std::string& scene_id) {
  RenderedScene out;
  out.descriptor = read_scene(layout.scene_json(scene_id));
  if (out.descriptor.scene_id != scene_id)
    throw Error(ErrorKind::Pairing, "scene.json in " + scene_id + " describes scene '" + out.descriptor.scene_id + "'");
  const auto& d = out.descriptor;
  out.absorption = sabine_absorption(d.rt60, d.room_dims);
  out.max_order = reflection_order(out.absorption, d.room_dims);
  out.dry_speech = read_wav(layout.dry_wav(scene_id, "speech"));
  out.dry_noise = read_wav(layout.dry_wav(scene_id, "noise"));
  const std::size_t n = out.dry_speech.size();
  if (out.dry_noise.size() != n) throw Error(ErrorKind::Size, scene_id + ": dry signals differ in length");
  const double fs = static_cast<double>(kSampleRate);
  for (std::size_t k = 0; k < d.mic_positions.size(); ++k) {
    RenderedNode node;
    node.speech = read_wav_channels(layout.node_wav(scene_id, k, "speech"));
    node.noise = read_wav_channels(layout.node_wav(scene_id, k, "noise"));
    if (node.speech.size() != d.mic_positions[k].size() || node.noise.size() != node.speech.size())
      throw Error(ErrorKind::Size, scene_id + ": node " + std::to_string(k + 1) + " channel count does not match the descriptor");
    for (std::size_t m = 0; m < node.speech.size(); ++m) {
      if (node.speech[m].size() != n || node.noise[m].size() != n)
        throw Error(ErrorKind::Size, scene_id + ": node " + std::to_string(k + 1) + " length differs from the dry speech");
      TimeSignal y{std::vector<double>(n), kSampleRate};
      for (std::size_t i = 0; i < n; ++i) y.samples[i] = node.speech[m].samples[i] + node.noise[m].samples[i];
      node.mixture.push_back(std::move(y));
    }
    node.input_sir_db = energy_ratio_db(node.speech[0].samples, node.noise[0].samples);
    node.target_delay = distance(d.target_position, d.mic_positions[k][0]) / kSpeedOfSound * fs;
    node.noise_delay = distance(d.noise_position, d.mic_positions[k][0]) / kSpeedOfSound * fs;
    out.nodes.push_back(std::move(node));
  }
  return out;
}

}  // namespace disco
