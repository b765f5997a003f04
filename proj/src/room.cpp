#include "disco/room.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "disco/error.hpp"
#include "disco/fft.hpp"
#include "disco/random.hpp"

namespace disco {
namespace {

constexpr int kMaxOrderCap = 12;
constexpr int kSamplingAttempts = 10000;
constexpr int kHalfTaps = kSincTaps / 2;

bool strictly_inside(const Vec3& p, const Vec3& dims) {
  for (int i = 0; i < 3; ++i)
    if (!(p[i] > 0.0 && p[i] < dims[i])) return false;
  return true;
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

std::vector<Vec3> node_mics(const Vec3& center, double orientation) {
  std::vector<Vec3> mics;
  for (std::size_t m = 0; m < kMicsPerNode; ++m) {
    const double a = orientation + static_cast<double>(m) * std::numbers::pi / 2;
    mics.push_back({center[0] + kMicRadius * std::cos(a), center[1] + kMicRadius * std::sin(a), center[2]});
  }
  return mics;
}

void sample_common(SceneDescriptor& s, Rng& rng) {
  s.room_dims = {rng.uniform(3.0, 8.0), rng.uniform(3.0, 5.0), rng.uniform(2.5, 3.0)};
  s.rt60 = rng.uniform(0.3, 0.6);
  s.noise_gain_db = rng.uniform(-6.0, 0.0);
}

void place_mics(SceneDescriptor& s, Rng& rng) {
  s.mic_positions.clear();
  for (const auto& c : s.node_centers) s.mic_positions.push_back(node_mics(c, rng.uniform(0.0, 2 * std::numbers::pi)));
}

Vec3 uniform_point(Rng& rng, const Vec3& dims, double margin, double z_lo, double z_hi) {
  return {rng.uniform(margin, dims[0] - margin), rng.uniform(margin, dims[1] - margin), rng.uniform(z_lo, z_hi)};
}

void sample_random(SceneDescriptor& s, Rng& rng) {
  s.node_centers.clear();
  for (std::size_t k = 0; k < kNodes; ++k) s.node_centers.push_back(uniform_point(rng, s.room_dims, 0.5, 0.7, 2.0));
  s.target_position = uniform_point(rng, s.room_dims, 0.5, 1.2, 2.0);
  s.noise_position = uniform_point(rng, s.room_dims, 0.5, 1.2, 2.0);
}

void sample_living(SceneDescriptor& s, Rng& rng) {
  s.node_centers.clear();
  const auto& d = s.room_dims;
  for (std::size_t k = 0; k + 1 < kNodes; ++k) {
    const auto wall = rng.index(4);
    const double off = rng.uniform(0.1, 0.5);
    const double z = rng.uniform(0.7, 0.95);
    Vec3 p{};
    if (wall < 2) {
      p[0] = rng.uniform(0.1, d[0] - 0.1);
      p[1] = wall == 0 ? off : d[1] - off;
    } else {
      p[1] = rng.uniform(0.1, d[1] - 0.1);
      p[0] = wall == 2 ? off : d[0] - off;
    }
    p[2] = z;
    s.node_centers.push_back(p);
  }
  s.node_centers.push_back(uniform_point(rng, d, 0.5, 0.7, 0.95));
  s.target_position = uniform_point(rng, d, 0.5, 1.2, 2.0);
  s.noise_position = uniform_point(rng, d, 0.5, 1.2, 2.0);
}

void sample_meeting(SceneDescriptor& s, Rng& rng) {
  const auto& d = s.room_dims;
  Table t;
  t.radius = rng.uniform(0.5, 1.0);
  t.center = {rng.uniform(t.radius, d[0] - t.radius), rng.uniform(t.radius, d[1] - t.radius), rng.uniform(0.7, 0.8)};
  s.table = t;
  const double phase = rng.uniform(0.0, 2 * std::numbers::pi);
  s.node_centers.clear();
  for (std::size_t k = 0; k < kNodes; ++k) {
    const double rho = t.radius - rng.uniform(0.05, 0.2);
    const double a = phase + static_cast<double>(k) * std::numbers::pi / 2;
    s.node_centers.push_back({t.center[0] + rho * std::cos(a), t.center[1] + rho * std::sin(a), t.center[2]});
  }
  auto source = [&] {
    const double rho = t.radius + rng.uniform(0.0, 0.5);
    const double a = rng.uniform(0.0, 2 * std::numbers::pi);
    return Vec3{t.center[0] + rho * std::cos(a), t.center[1] + rho * std::sin(a), rng.uniform(1.15, 1.3)};
  };
  s.target_position = source();
  s.noise_position = source();
}

std::vector<double> convolve_truncated(const std::vector<double>& rir, const std::vector<double>& x, std::size_t n) {
  auto y = fft_convolve(rir, x);
  y.resize(n, 0.0);
  return y;
}

}  // namespace

double sabine_absorption(double rt60, const Vec3& d) {
  if (!(rt60 > 0.0)) throw Error(ErrorKind::Infeasible, "rt60 must be positive");
  if (!(d[0] > 0.0 && d[1] > 0.0 && d[2] > 0.0)) throw Error(ErrorKind::Geometry, "room dimensions must be positive");
  const double volume = d[0] * d[1] * d[2];
  const double surface = 2.0 * (d[0] * d[1] + d[0] * d[2] + d[1] * d[2]);
  const double alpha = 0.161 * volume / (surface * rt60);
  if (alpha > 1.0)
    throw Error(ErrorKind::Infeasible, "room too small for rt60 " + std::to_string(rt60) +
                                           " s (absorption would be " + std::to_string(alpha) + ")");
  return alpha;
}

int reflection_order(double absorption, const Vec3& d) {
  if (!(absorption > 0.0 && absorption <= 1.0)) throw Error(ErrorKind::Infeasible, "absorption must lie in (0,1]");
  const double beta2 = 1.0 - absorption;
  // Per-order energy estimate: about 4r^2 + 2 images at r reflections, each
  // roughly r mean free paths away with amplitude beta^r.
  const double mfp = 4.0 * d[0] * d[1] * d[2] / (2.0 * (d[0] * d[1] + d[0] * d[2] + d[1] * d[2]));
  std::vector<double> per_order;
  double total = 0.0;
  double weight = 1.0;
  for (int r = 0; r < 4000; ++r) {
    const double images = r == 0 ? 1.0 : 4.0 * r * r + 2.0;
    const double dist = std::max(1, r) * mfp;
    const double e = images * weight / (dist * dist);
    per_order.push_back(e);
    total += e;
    weight *= beta2;
    if (weight < 1e-300) break;
  }
  double head = 0.0;
  for (int n = 0; n < static_cast<int>(per_order.size()); ++n) {
    head += per_order[static_cast<std::size_t>(n)];
    if (total - head < 1e-3 * total) return std::min(n, kMaxOrderCap);
  }
  return kMaxOrderCap;
}

std::vector<ImageSource> image_sources(const Vec3& d, const Vec3& src, int max_order) {
  std::vector<ImageSource> out;
  if (max_order < 0) return out;
  const int n_max = (max_order + 1) / 2;
  for (int qx = 0; qx < 2; ++qx)
    for (int qy = 0; qy < 2; ++qy)
      for (int qz = 0; qz < 2; ++qz)
        for (int nx = -n_max; nx <= n_max; ++nx)
          for (int ny = -n_max; ny <= n_max; ++ny)
            for (int nz = -n_max; nz <= n_max; ++nz) {
              const int order = std::abs(2 * nx - qx) + std::abs(2 * ny - qy) + std::abs(2 * nz - qz);
              if (order > max_order) continue;
              out.push_back({{(1 - 2 * qx) * src[0] + 2 * nx * d[0], (1 - 2 * qy) * src[1] + 2 * ny * d[1],
                              (1 - 2 * qz) * src[2] + 2 * nz * d[2]},
                             order});
            }
  return out;
}

TimeSignal simulate_rir(const Vec3& d, const Vec3& source, const Vec3& mic, int max_order, double absorption) {
  if (!strictly_inside(source, d)) throw Error(ErrorKind::Geometry, "source outside the room");
  if (!strictly_inside(mic, d)) throw Error(ErrorKind::Geometry, "microphone outside the room");
  if (distance(source, mic) < 1e-6) throw Error(ErrorKind::Geometry, "source and microphone coincide");
  if (max_order < 0) throw Error(ErrorKind::Geometry, "reflection order must be non-negative");
  if (!(absorption > 0.0 && absorption <= 1.0)) throw Error(ErrorKind::Infeasible, "absorption must lie in (0,1]");

  const double beta = std::sqrt(1.0 - absorption);
  const auto images = image_sources(d, source, max_order);
  const double fs = static_cast<double>(kSampleRate);

  long last = 0;
  for (const auto& im : images)
    last = std::max(last, std::lround(distance(im.position, mic) / kSpeedOfSound * fs) + kHalfTaps);

  TimeSignal rir;
  rir.samples.assign(static_cast<std::size_t>(last + 1), 0.0);
  for (const auto& im : images) {
    const double dist = distance(im.position, mic);
    const double delay = dist / kSpeedOfSound * fs;
    const double amp = std::pow(beta, im.reflections) / dist;
    const long center = std::lround(delay);
    for (long n = center - kHalfTaps; n <= center + kHalfTaps; ++n) {
      if (n < 0) continue;
      const double x = static_cast<double>(n) - delay;
      const double w = 0.5 * (1.0 + std::cos(std::numbers::pi * x / (kHalfTaps + 1)));
      rir.samples[static_cast<std::size_t>(n)] += amp * sinc(x) * w;
    }
  }
  return rir;
}

SceneDescriptor sample_scene(ConfigType type, std::uint64_t seed, std::string scene_id) {
  Rng rng(mix_seed(seed, 0));
  SceneDescriptor s;
  s.scene_id = std::move(scene_id);
  s.config_type = type;
  s.rng_seed = seed;
  for (int attempt = 0; attempt < kSamplingAttempts; ++attempt) {
    sample_common(s, rng);
    s.table.reset();
    switch (type) {
      case ConfigType::Random: sample_random(s, rng); break;
      case ConfigType::Living: sample_living(s, rng); break;
      case ConfigType::Meeting: sample_meeting(s, rng); break;
    }
    place_mics(s, rng);
    if (scene_violations(s).empty()) return s;
  }
  throw Error(ErrorKind::Sampling, "no valid " + to_string(type) + " scene after 10000 attempts (seed " +
                                       std::to_string(seed) + ")");
}

std::size_t noise_offset(const SceneDescriptor& scene, std::size_t noise_length) {
  if (noise_length == 0) return 0;
  Rng rng(mix_seed(scene.rng_seed, 1));
  return static_cast<std::size_t>(rng.index(noise_length));
}

double energy_ratio_db(const std::vector<double>& s, const std::vector<double>& n) {
  const double es = energy(s), en = energy(n);
  if (en <= 0.0) return es > 0.0 ? 100.0 : 0.0;
  if (es <= 0.0) return -100.0;
  return std::clamp(10.0 * std::log10(es / en), -100.0, 100.0);
}

RenderedScene render_scene(const SceneDescriptor& scene, const TimeSignal& speech, const TimeSignal& noise,
                           const RenderOptions& options) {
  if (speech.sample_rate != kSampleRate || noise.sample_rate != kSampleRate)
    throw Error(ErrorKind::Rate, "render inputs must be 16 kHz");
  if (speech.samples.empty() || energy(speech.samples) == 0.0)
    throw Error(ErrorKind::Degenerate, "speech signal is silent");
  if (noise.samples.empty()) throw Error(ErrorKind::Degenerate, "noise signal is empty");

  RenderedScene out;
  out.descriptor = scene;
  out.absorption = options.absorption ? *options.absorption : sabine_absorption(scene.rt60, scene.room_dims);
  out.max_order = options.max_order ? *options.max_order : reflection_order(out.absorption, scene.room_dims);

  const std::size_t n = speech.size();
  const double gain = std::pow(10.0, scene.noise_gain_db / 20.0);
  const std::size_t offset = noise_offset(scene, noise.size());
  out.dry_speech = speech;
  out.dry_noise.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.dry_noise.samples[i] = gain * noise.samples[(offset + i) % noise.size()];

  const double fs = static_cast<double>(kSampleRate);
  for (std::size_t k = 0; k < scene.mic_positions.size(); ++k) {
    RenderedNode node;
    for (const auto& mic : scene.mic_positions[k]) {
      const auto rir_s = simulate_rir(scene.room_dims, scene.target_position, mic, out.max_order, out.absorption);
      const auto rir_n = simulate_rir(scene.room_dims, scene.noise_position, mic, out.max_order, out.absorption);
      TimeSignal s{convolve_truncated(rir_s.samples, out.dry_speech.samples, n), kSampleRate};
      TimeSignal v{convolve_truncated(rir_n.samples, out.dry_noise.samples, n), kSampleRate};
      TimeSignal y{std::vector<double>(n), kSampleRate};
      for (std::size_t i = 0; i < n; ++i) y.samples[i] = s.samples[i] + v.samples[i];
      node.speech.push_back(std::move(s));
      node.noise.push_back(std::move(v));
      node.mixture.push_back(std::move(y));
    }
    if (!node.speech.empty()) node.input_sir_db = energy_ratio_db(node.speech[0].samples, node.noise[0].samples);
    if (!scene.mic_positions[k].empty()) {
      node.target_delay = distance(scene.target_position, scene.mic_positions[k][0]) / kSpeedOfSound * fs;
      node.noise_delay = distance(scene.noise_position, scene.mic_positions[k][0]) / kSpeedOfSound * fs;
    }
    out.nodes.push_back(std::move(node));
  }
  return out;
}

}  // namespace disco
