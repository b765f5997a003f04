#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "disco/types.hpp"

namespace disco {

/// One-sided complex STFT, n_bins x n_frames (one column per frame).
struct Spectrogram {
  Eigen::MatrixXcd bins;
  std::size_t frame_size = kFrameSize;
  std::size_t hop = kHop;
  int sample_rate = kSampleRate;

  Eigen::Index n_bins() const noexcept { return bins.rows(); }
  Eigen::Index n_frames() const noexcept { return bins.cols(); }
};

/// Periodic (DFT-even) Hann window of length n.
std::vector<double> hann_window(std::size_t n);

/// Hann-windowed frames starting at t*hop, the last one zero-padded.
/// Frame count is ceil(len / hop).
Spectrogram analyze(const TimeSignal& signal, std::size_t frame_size = kFrameSize, std::size_t hop = kHop);

/// Weighted overlap-add with the analysis window as synthesis window, each
/// output sample normalized by the overlapped squared-window sum (floored at
/// half its peak, which only affects the first and last hop). Output length
/// is (n_frames - 1) * hop + frame_size; callers trim.
TimeSignal synthesize(const Spectrogram& spec);

/// synthesize() trimmed (or zero-padded) to `length` samples.
TimeSignal synthesize(const Spectrogram& spec, std::size_t length);

}  // namespace disco
