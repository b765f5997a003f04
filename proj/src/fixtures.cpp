#include "disco/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "disco/error.hpp"
#include "disco/fft.hpp"
#include "disco/random.hpp"

namespace disco {

namespace {

constexpr double kFixtureRms = 0.05;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vowel {
  double f1, f2, f3;
};

// rough adult formant centres
constexpr Vowel kVowels[] = {{730, 1090, 2440}, {270, 2290, 3010}, {530, 1840, 2480},
                             {570, 840, 2410},  {300, 870, 2240},  {660, 1720, 2410}};

double formant_gain(double f, const Vowel& v) {
  auto peak = [f](double fc, double bw) { return 1.0 / (1.0 + std::pow((f - fc) / bw, 2.0)); };
  return 0.05 + peak(v.f1, 90.0) + 0.7 * peak(v.f2, 120.0) + 0.4 * peak(v.f3, 160.0);
}

void normalize_rms(std::vector<double>& x) {
  const double e = energy(x);
  if (e <= 0.0) throw Error(ErrorKind::Degenerate, "fixture came out silent");
  const double scale = kFixtureRms / std::sqrt(e / static_cast<double>(x.size()));
  for (double& v : x) v *= scale;
}

}  // namespace

TimeSignal synthetic_speech(std::uint64_t seed, double seconds) {
  const auto n = static_cast<std::size_t>(seconds * kSampleRate);
  if (n == 0) throw Error(ErrorKind::Validation, "fixture length must be positive");
  Rng rng(mix_seed(seed, 11));
  std::vector<double> x(n, 0.0);
  const double fs = kSampleRate;
  const double base_f0 = rng.uniform(100.0, 220.0);
  std::size_t pos = static_cast<std::size_t>(rng.uniform(0.02, 0.1) * fs);
  while (pos < n) {
    if (rng.uniform() < 0.2) {
      // fricative: first-difference of noise, i.e. a high-tilted burst
      const auto len = static_cast<std::size_t>(rng.uniform(0.05, 0.12) * fs);
      const double amp = rng.uniform(0.1, 0.3);
      double prev = 0.0;
      for (std::size_t i = 0; i < len && pos + i < n; ++i) {
        const double w = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(len));
        const double g = rng.normal();
        x[pos + i] += amp * w * (g - prev);
        prev = g;
      }
      pos += len;
    } else {
      const auto len = static_cast<std::size_t>(rng.uniform(0.12, 0.28) * fs);
      const Vowel& v = kVowels[rng.index(std::size(kVowels))];
      const double f0_start = base_f0 * rng.uniform(0.85, 1.2);
      const double f0_end = f0_start * rng.uniform(0.8, 1.15);
      const double amp = rng.uniform(0.5, 1.0);
      const int harmonics = static_cast<int>(4000.0 / std::max(f0_start, f0_end));
      std::vector<double> gains(static_cast<std::size_t>(harmonics));
      const double f0_mid = 0.5 * (f0_start + f0_end);
      for (int h = 1; h <= harmonics; ++h) gains[h - 1] = formant_gain(h * f0_mid, v) / std::sqrt(double(h));
      double phase = rng.uniform(0.0, kTwoPi);
      for (std::size_t i = 0; i < len && pos + i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(len);
        const double f0 = f0_start + (f0_end - f0_start) * t;
        phase += kTwoPi * f0 / fs;
        double s = 0.0;
        for (int h = 1; h <= harmonics; ++h) s += gains[h - 1] * std::sin(h * phase);
        const double w = 0.5 - 0.5 * std::cos(kTwoPi * t);
        x[pos + i] += amp * w * s;
      }
      pos += len;
    }
    pos += static_cast<std::size_t>(rng.uniform() < 0.25 ? rng.uniform(0.15, 0.35) * fs : rng.uniform(0.01, 0.06) * fs);
  }
  normalize_rms(x);
  return {std::move(x), kSampleRate};
}

TimeSignal speech_shaped_noise(std::uint64_t seed, double seconds, const std::vector<TimeSignal>& templates) {
  const auto n = static_cast<std::size_t>(seconds * kSampleRate);
  if (n == 0) throw Error(ErrorKind::Validation, "fixture length must be positive");
  if (templates.empty()) throw Error(ErrorKind::Empty, "speech-shaped noise needs template signals");

  // long-term power spectrum on a 512-point grid
  const std::size_t frame = kFrameSize;
  const RealFft small(frame);
  std::vector<double> psd(small.bins(), 0.0);
  std::vector<double> buf(frame);
  std::vector<std::complex<double>> spec(small.bins());
  for (const auto& t : templates) {
    for (std::size_t start = 0; start + frame <= t.size(); start += frame / 2) {
      for (std::size_t i = 0; i < frame; ++i) {
        const double w = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(frame));
        buf[i] = w * t.samples[start + i];
      }
      small.forward(buf, spec);
      for (std::size_t k = 0; k < spec.size(); ++k) psd[k] += std::norm(spec[k]);
    }
  }

  Rng rng(mix_seed(seed, 12));
  const std::size_t len = next_pow2(n);
  const RealFft big(len);
  std::vector<double> white(len);
  for (double& v : white) v = rng.normal();
  std::vector<std::complex<double>> w_spec(big.bins());
  big.forward(white, w_spec);
  for (std::size_t k = 0; k < w_spec.size(); ++k) {
    // linear interpolation of the magnitude envelope onto the long grid
    const double pos = static_cast<double>(k) * static_cast<double>(frame) / static_cast<double>(len);
    const auto lo = std::min(static_cast<std::size_t>(pos), psd.size() - 1);
    const std::size_t hi = std::min(lo + 1, psd.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    w_spec[k] *= std::sqrt((1.0 - frac) * psd[lo] + frac * psd[hi]);
  }
  big.inverse(w_spec, white);
  white.resize(n);
  normalize_rms(white);
  return {std::move(white), kSampleRate};
}

FixtureSet synthetic_fixtures(std::uint64_t seed, std::size_t n_speech, std::size_t n_noise, double seconds) {
  FixtureSet set;
  for (std::size_t i = 0; i < n_speech; ++i) set.speech.push_back(synthetic_speech(mix_seed(seed, 100 + i), seconds));
  for (std::size_t i = 0; i < n_noise; ++i)
    set.noise.push_back(speech_shaped_noise(mix_seed(seed, 200 + i), seconds, set.speech));
  return set;
}

}  // namespace disco
