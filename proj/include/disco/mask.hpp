#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <filesystem>
#include <string>

#include "disco/stft.hpp"

namespace disco {

/// Real time-frequency mask in [0,1] on a Spectrogram grid (n_bins x n_frames).
///
/// Values are held on a fixed grid of multiples of 2^-24. On that grid
/// 1 - m is exact in both float and double, so complement() is an exact
/// involution and every mask survives the float32 MSK1 format unchanged.
class TfMask {
 public:
  static constexpr double kResolution = 1.0 / 16777216.0;

  TfMask() = default;
  /// Throws Validation if any value is outside [0,1] or not finite.
  explicit TfMask(Eigen::MatrixXd values);

  static TfMask constant(Eigen::Index n_bins, Eigen::Index n_frames, double value);

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  Eigen::Index n_bins() const noexcept { return values_.rows(); }
  Eigen::Index n_frames() const noexcept { return values_.cols(); }
  double operator()(Eigen::Index bin, Eigen::Index frame) const { return values_(bin, frame); }

  bool matches(const Spectrogram& spec) const noexcept {
    return n_bins() == spec.n_bins() && n_frames() == spec.n_frames();
  }

  friend bool operator==(const TfMask& a, const TfMask& b) {
    return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_;
  }

 private:
  Eigen::MatrixXd values_;
};

enum class IrmKind { Magnitude, Power };

/// |S| / (|S| + |N|) (or the power ratio); cells where both vanish get 0.5.
TfMask irm(const Spectrogram& speech, const Spectrogram& noise, IrmKind kind = IrmKind::Magnitude);

TfMask complement(const TfMask& mask);

/// Where step masks come from: ideal ratio masks computed from the clean
/// images, or MSK1 files at <run_dir>/masks/<scene_id>/node<k>_step<s>.msk
/// (k is 1-based).
struct MaskProvider {
  enum class Mode { OracleIrm, ExternalFile };

  Mode mode = Mode::OracleIrm;
  std::filesystem::path run_dir;
  IrmKind irm_kind = IrmKind::Magnitude;

  static MaskProvider oracle(IrmKind kind = IrmKind::Magnitude) { return {Mode::OracleIrm, {}, kind}; }
  static MaskProvider external(std::filesystem::path dir) { return {Mode::ExternalFile, std::move(dir), IrmKind::Magnitude}; }

  /// Parses "oracle" or "dir:<path>".
  static MaskProvider parse(const std::string& text);
  std::string describe() const;
};

/// Path of an external mask; `node` is 0-based, `step` is 1 or 2.
std::filesystem::path mask_path(const std::filesystem::path& run_dir, const std::string& scene_id,
                                std::size_t node, int step);

/// Everything a provider may need to produce one node's mask.
struct MaskRequest {
  std::string scene_id;
  std::size_t node = 0;
  int step = 1;
  const Spectrogram* mixture_ref = nullptr;  // grid to match
  const Spectrogram* speech_ref = nullptr;   // oracle mode only
  const Spectrogram* noise_ref = nullptr;    // oracle mode only
};

TfMask get_mask(const MaskProvider& provider, const MaskRequest& request);

}  // namespace disco
