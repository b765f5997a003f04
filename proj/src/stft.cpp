#include "disco/stft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "disco/error.hpp"
#include "disco/fft.hpp"

namespace disco {

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

Spectrogram analyze(const TimeSignal& signal, std::size_t frame_size, std::size_t hop) {
  if (frame_size == 0 || hop == 0 || frame_size % 2 != 0)
    throw Error(ErrorKind::Size, "frame size must be even and hop positive");
  if (signal.size() < frame_size)
    throw Error(ErrorKind::Size, "signal of " + std::to_string(signal.size()) + " samples is shorter than one frame");

  const std::size_t n_frames = (signal.size() + hop - 1) / hop;
  const auto window = hann_window(frame_size);
  const RealFft fft(frame_size);

  Spectrogram spec;
  spec.frame_size = frame_size;
  spec.hop = hop;
  spec.sample_rate = signal.sample_rate;
  spec.bins.resize(static_cast<Eigen::Index>(fft.bins()), static_cast<Eigen::Index>(n_frames));

  std::vector<double> frame(frame_size);
  std::vector<std::complex<double>> out(fft.bins());
  for (std::size_t t = 0; t < n_frames; ++t) {
    const std::size_t start = t * hop;
    for (std::size_t i = 0; i < frame_size; ++i) {
      const std::size_t idx = start + i;
      frame[i] = idx < signal.size() ? signal.samples[idx] * window[i] : 0.0;
    }
    fft.forward(frame, out);
    for (std::size_t k = 0; k < out.size(); ++k) spec.bins(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) = out[k];
  }
  return spec;
}

TimeSignal synthesize(const Spectrogram& spec) {
  const std::size_t n = spec.frame_size;
  if (n == 0 || spec.hop == 0 || static_cast<std::size_t>(spec.n_bins()) != n / 2 + 1)
    throw Error(ErrorKind::Size, "spectrogram bin count does not match frame size");
  const std::size_t n_frames = static_cast<std::size_t>(spec.n_frames());
  if (n_frames == 0) throw Error(ErrorKind::Size, "spectrogram has no frames");

  const std::size_t length = (n_frames - 1) * spec.hop + n;
  const auto window = hann_window(n);
  const RealFft fft(n);

  std::vector<double> acc(length, 0.0), norm(length, 0.0);
  std::vector<std::complex<double>> column(fft.bins());
  std::vector<double> frame(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t t = 0; t < n_frames; ++t) {
    for (std::size_t k = 0; k < column.size(); ++k)
      column[k] = spec.bins(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t));
    fft.inverse(column, frame);
    const std::size_t start = t * spec.hop;
    for (std::size_t i = 0; i < n; ++i) {
      acc[start + i] += frame[i] * scale * window[i];
      norm[start + i] += window[i] * window[i];
    }
  }
  TimeSignal out;
  out.sample_rate = spec.sample_rate;
  out.samples.resize(length);
  // Edges are covered by one tapered frame only; dividing by that taper would
  // blow up anything the filters made inconsistent, so the divisor is floored
  // at half its peak (the interior never drops below that for hop <= n/2).
  const double floor = 0.5 * *std::max_element(norm.begin(), norm.end());
  for (std::size_t i = 0; i < length; ++i) out.samples[i] = acc[i] / std::max(norm[i], floor);
  return out;
}

TimeSignal synthesize(const Spectrogram& spec, std::size_t length) {
  TimeSignal out = synthesize(spec);
  out.samples.resize(length, 0.0);
  return out;
}

}  // namespace disco
