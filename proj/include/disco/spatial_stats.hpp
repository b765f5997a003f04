#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <memory>
#include <vector>

#include "disco/mask.hpp"
#include "disco/stft.hpp"

namespace disco {

enum class MaskPolicy { Local, Distant };

/// Where a stacked channel comes from.
struct ChannelOrigin {
  enum class Kind { LocalMic, TargetEstimate, NoiseEstimate };
  Kind kind = Kind::LocalMic;
  std::size_t node = 0;  // owning node for local mics, sender for compressed signals
};

/// Channels stacked for one node: local mics first (channel 0 is the
/// reference), then received compressed signals in ascending sender order.
struct StackedSpectra {
  std::vector<std::shared_ptr<const Spectrogram>> channels;
  std::vector<ChannelOrigin> origins;
  /// Sender's step-1 mask for each channel; only populated for received
  /// channels under the distant policy.
  std::vector<std::shared_ptr<const TfMask>> sender_masks;

  std::size_t size() const noexcept { return channels.size(); }
  Eigen::Index n_bins() const { return channels.empty() ? 0 : channels.front()->n_bins(); }
  Eigen::Index n_frames() const { return channels.empty() ? 0 : channels.front()->n_frames(); }

  void add(std::shared_ptr<const Spectrogram> spec, ChannelOrigin origin,
           std::shared_ptr<const TfMask> sender_mask = nullptr) {
    channels.push_back(std::move(spec));
    origins.push_back(origin);
    sender_masks.push_back(std::move(sender_mask));
  }
};

/// Masked speech covariance (R_ss_est) and complement-masked noise
/// covariance (R_nn), one C x C Hermitian matrix per frequency bin.
struct CovariancePair {
  std::vector<Eigen::MatrixXcd> speech;
  std::vector<Eigen::MatrixXcd> noise;
  Eigen::Index frames = 0;
  std::size_t degenerate_bins = 0;  // bins where R_nn fell back to loading only
};

inline constexpr double kDiagonalLoading = 1e-9;

/// R(f) = (1/T) sum_t (m . y)(m . y)^H with the speech mask, and likewise
/// with 1 - m. Under MaskPolicy::Local every channel uses `local_mask`;
/// under Distant, received channels use their sender's mask. Both results
/// get delta * trace / C on the diagonal.
CovariancePair masked_covariances(const StackedSpectra& stacked, const TfMask& local_mask, MaskPolicy policy,
                                  double delta = kDiagonalLoading);

}  // namespace disco
