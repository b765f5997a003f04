#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace disco {

inline constexpr int kSampleRate = 16000;
inline constexpr std::size_t kFrameSize = 512;
inline constexpr std::size_t kHop = 256;
inline constexpr double kSpeedOfSound = 343.0;

/// Mono waveform. Pipeline-internal signals are always 16 kHz.
struct TimeSignal {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  std::size_t size() const noexcept { return samples.size(); }
};

using Vec3 = std::array<double, 3>;

inline double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline double energy(const std::vector<double>& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

}  // namespace disco
