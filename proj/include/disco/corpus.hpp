#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "disco/mask.hpp"
#include "disco/room.hpp"
#include "disco/scene.hpp"

namespace disco {

inline constexpr const char* kVersion = "0.1.0";

/// On-disk corpus:
///   corpus.json
///   fixtures/{speech,noise}_NN.wav            (synthetic fixtures only)
///   scenes/<id>/scene.json
///   scenes/<id>/node<k>_{speech,noise,mix}.wav  4-channel float32
///   scenes/<id>/dry_{speech,noise}.wav
///   masks/<id>/node<k>_step<s>.msk            oracle IRMs
class CorpusLayout {
 public:
  explicit CorpusLayout(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path manifest() const { return root_ / "corpus.json"; }
  std::filesystem::path scene_dir(const std::string& id) const { return root_ / "scenes" / id; }
  std::filesystem::path scene_json(const std::string& id) const { return scene_dir(id) / "scene.json"; }
  /// `node` is 0-based; kind is "speech", "noise" or "mix".
  std::filesystem::path node_wav(const std::string& id, std::size_t node, const std::string& kind) const;
  std::filesystem::path dry_wav(const std::string& id, const std::string& kind) const;

 private:
  std::filesystem::path root_;
};

struct CorpusInfo {
  ConfigType config = ConfigType::Random;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool synthetic_fixtures = false;
  double fixture_seconds = 0.0;
  std::vector<std::string> speech_files;
  std::vector<std::string> noise_files;
  std::vector<std::string> scenes;
};

std::string corpus_info_json(const CorpusInfo& info);
CorpusInfo read_corpus_info(const std::filesystem::path& root);

/// Rounds every rendered waveform to float32 so that what is kept in memory
/// matches what the corpus files hold.
void quantize_float32(RenderedScene& scene);

/// Writes descriptor, waveforms and oracle masks of one scene.
void save_rendered(const RenderedScene& scene, const CorpusLayout& layout);

/// Reads a scene back. The mixture is rebuilt as speech + noise, delays and
/// acoustics are recomputed from the descriptor.
RenderedScene load_rendered(const CorpusLayout& layout, const std::string& scene_id);

/// Oracle magnitude IRM of one node, from its reference-mic images.
TfMask oracle_mask(const RenderedNode& node);

}  // namespace disco
