#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "disco/scene.hpp"
#include "disco/types.hpp"

namespace disco {

/// Uniform wall absorption from Sabine's formula, 0.161 V / (S rt60).
/// Throws Infeasible when the result would exceed 1.
double sabine_absorption(double rt60, const Vec3& room_dims);

/// Smallest image order whose estimated tail energy falls below 0.1% of
/// the total for this absorption, capped at 12.
int reflection_order(double absorption, const Vec3& room_dims);

struct ImageSource {
  Vec3 position{};
  int reflections = 0;
};

/// Shoebox image sources with at most `max_order` reflections.
std::vector<ImageSource> image_sources(const Vec3& room_dims, const Vec3& source, int max_order);

inline constexpr int kSincTaps = 81;

/// Image-source RIR at 16 kHz. Each image adds beta^r / d at delay d / c,
/// placed with an 81-tap Hann-windowed sinc; beta = sqrt(1 - absorption).
/// Sample 0 is time zero; kernel taps that would fall before it are dropped.
TimeSignal simulate_rir(const Vec3& room_dims, const Vec3& source, const Vec3& mic, int max_order,
                        double absorption);

/// Rejection-samples a scene of the given layout. Deterministic in the seed.
SceneDescriptor sample_scene(ConfigType type, std::uint64_t seed, std::string scene_id = {});

struct RenderedNode {
  std::vector<TimeSignal> speech;   // per mic
  std::vector<TimeSignal> noise;    // per mic
  std::vector<TimeSignal> mixture;  // speech + noise, per mic
  double input_sir_db = 0.0;        // at the reference mic (mic 0)
  double target_delay = 0.0;        // direct-path delay to the reference mic, samples
  double noise_delay = 0.0;
};

struct RenderedScene {
  SceneDescriptor descriptor;
  double absorption = 0.0;
  int max_order = 0;
  std::vector<RenderedNode> nodes;
  TimeSignal dry_speech;
  TimeSignal dry_noise;  // gain applied, looped to the speech length

  std::size_t length() const noexcept { return dry_speech.size(); }
};

struct RenderOptions {
  std::optional<int> max_order;      // default: reflection_order()
  std::optional<double> absorption;  // default: sabine_absorption()
};

/// Noise offset into the noise recording for this scene, derived from its seed.
std::size_t noise_offset(const SceneDescriptor& scene, std::size_t noise_length);

RenderedScene render_scene(const SceneDescriptor& scene, const TimeSignal& speech, const TimeSignal& noise,
                           const RenderOptions& options = {});

/// 10 log10(|s|^2 / |n|^2), capped to +-100 dB.
double energy_ratio_db(const std::vector<double>& s, const std::vector<double>& n);

}  // namespace disco
